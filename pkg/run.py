#!/usr/bin/env python
"""
Steklov Expanders - Main Entry Point
Command-line launcher, e.g. `python run.py growth --k 4 --sizes 8,12,16 --out runs/a`
"""

if __name__ == "__main__":
    import sys

    from app.main import main
    sys.exit(main())
