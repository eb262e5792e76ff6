import sys
from pathlib import Path

# allow test modules to import the shared oracles from each other when pytest
# is invoked from the repository root
sys.path.insert(0, str(Path(__file__).parent))
