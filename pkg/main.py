#!/usr/bin/env python3
"""
hitdisk - Command-Line Entry Point
"""
import sys
from pathlib import Path

# Add project root to Python path
sys.path.insert(0, str(Path(__file__).parent))

from hitdisk.core.main import main

if __name__ == "__main__":
    sys.exit(main())
