"""Eigenbound - process initialization"""
import logging
import os
import sys

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

LOG_LEVEL = os.environ.get('EIGENBOUND_LOG_LEVEL', 'WARNING').upper()

logging.basicConfig(
    level=getattr(logging, LOG_LEVEL, logging.WARNING),
    format='%(levelname)s %(name)s: %(message)s',
    stream=sys.stderr,
)


def main(argv: list[str] | None = None) -> int:
    """Entry point for the eigenbound command."""
    # Import index after logging is configured
    import index
    return index.run(argv)


if __name__ == '__main__':
    sys.exit(main())
