import sys
from pathlib import Path

# tests import the frozen-oracle module by name
sys.path.insert(0, str(Path(__file__).parent))
