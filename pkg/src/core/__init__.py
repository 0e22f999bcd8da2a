# Objective, solvers (GRNM, Wirtinger-flow baseline) and metrics
