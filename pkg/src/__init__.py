"""
loctrig: localized-kernel approximation on spheres and circles, point-source
separation, Jacobi function lifting and MASC active classification.
"""
