# DySPN depth-completion propagation
