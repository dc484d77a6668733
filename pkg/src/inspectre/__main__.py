import sys

from inspectre.cli import main

sys.exit(main())
