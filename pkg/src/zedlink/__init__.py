"""zedlink: feasibility calculators and desk-scale simulations for
zero-energy backscatter tags riding ambient cellular signals."""

__version__ = "0.1.0"
