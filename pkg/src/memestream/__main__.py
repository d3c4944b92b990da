import sys

from memestream.cli import main

sys.exit(main())
