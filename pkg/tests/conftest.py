import sys
from pathlib import Path

# make the test-local oracle helpers importable as plain modules
sys.path.insert(0, str(Path(__file__).parent))
