import sys

from genderflow.cli import main

sys.exit(main())
