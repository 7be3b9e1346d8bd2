# Integration tests: Command line (Module 1–6)
