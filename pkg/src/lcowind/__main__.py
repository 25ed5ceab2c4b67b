"""Module entry point: python -m lcowind <subcommand> config.ini ..."""
from .cli import console_main

if __name__ == "__main__":
    console_main()
