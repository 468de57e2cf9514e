"""Run the acceptance module and print its PASS/FAIL summary.

Usage: python scripts/run_acceptance.py [extra pytest args]
"""
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    cmd = [sys.executable, "-m", "pytest", str(ROOT / "tests" / "test_acceptance.py"), "-q", *sys.argv[1:]]
    sys.exit(subprocess.call(cmd, cwd=ROOT))
