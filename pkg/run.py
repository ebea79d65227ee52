#!/usr/bin/env python3
"""
Entry point for the gensets experiments.
Usage: python run.py <cross|nodes|approx|wce|bound|search|convergence|verify> [--config PATH] [--seed U64] [--out PATH] [--format csv|json]
"""

import sys
import os

sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

if __name__ == '__main__':
    from gensets.cli import main

    sys.exit(main())
