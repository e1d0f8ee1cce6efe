"""Self-intersection growth of geodesics on a genus-2 hyperbolic surface."""
