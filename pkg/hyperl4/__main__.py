"""``python -m hyperl4`` runs the CLI."""

from hyperl4.main import main

main()
