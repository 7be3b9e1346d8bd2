# Integration tests: synthetic scenes through propagation, metrics and experiments (Module 1–6 library side)
