# qmr - quadratic measurements regression toolkit
