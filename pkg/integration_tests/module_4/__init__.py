# Integration tests: Module 1 + 4 + 5
