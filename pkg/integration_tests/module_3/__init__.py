# Integration tests: Module 1 + 3 + 5
