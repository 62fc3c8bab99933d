"""polarsep - polarization models and two-photon separability.

Entry point for the command-line tool.
"""
import sys
import os

# Ensure the project root is in the path
_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if _root not in sys.path:
    sys.path.insert(0, _root)


def main():
    """Run the polarsep command line and exit with its status."""
    from src.ui.cli import main as cli_main

    sys.exit(cli_main())


if __name__ == "__main__":
    main()
