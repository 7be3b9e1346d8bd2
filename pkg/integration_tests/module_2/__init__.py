# Integration tests: Module 1 kernel + Module 2 dense oracle
