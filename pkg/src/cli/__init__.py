# qmr command-line interface
