"""Protocol stub that answers with a non-numeric token."""
import sys

rows = sys.stdin.read().splitlines()
sys.stdout.write("".join("oops\n" for _ in rows))
