"""
Ponto de entrada do simulador (delegado para src/cli.py).

Exemplo:
    python main.py simulate --foot elliptical --period 4.5
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), "src"))

from cli import main


if __name__ == "__main__":
    sys.exit(main())
