# Unit tests for the propagation library (parallel structure to src/)
