import sys

from bcibenchmark.main import main

sys.exit(main())
