import sys
from pathlib import Path

# make the in-repo package and the shared oracle helpers importable
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
sys.path.insert(0, str(Path(__file__).resolve().parent))
