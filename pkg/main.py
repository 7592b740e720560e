#!/usr/bin/env python3
"""
Точка входа для командной строки
"""

import sys

from cli import main

if __name__ == "__main__":
    sys.exit(main())
