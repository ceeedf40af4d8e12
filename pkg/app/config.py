from pathlib import Path
from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv

load_dotenv()

BASE_DIR = Path(__file__).parent.parent
RUNS_DIR = BASE_DIR / "runs"


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="STEKLOV_",
        case_sensitive=False,
        extra="ignore",
    )
    # Application
    app_name: str = "Steklov Expanders"
    app_version: str = "1.0.0"

    # Graphs
    default_degree: int = 4
    default_seed: int = 7
    gap_threshold: float = 0.2
    max_sampling_attempts: int = 1000
    max_dense_graph_size: int = 4096

    # Surfaces
    piece_n_b: int = 16
    piece_resolution: int = 4
    loop_length_tol: float = 1e-9
    degenerate_margin: float = 1e-12

    # Eigensolvers
    n_eigs: int = 6
    tol_res: float = 1e-8
    max_iterations: int = 5000
    dense_fallback_threshold: int = 2000
    zero_mode_tol: float = 1e-6
    schur_block_size: int = 256

    # Experiments
    kokarev_slack: float = 1e-2
    ratio_spread_ceiling: float = 10.0
    rayleigh_tol: float = 1e-8
    lower_bound_tol: float = 1e-6

    # Output
    runs_dir: str = str(RUNS_DIR)


settings = Settings()
