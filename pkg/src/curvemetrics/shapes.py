"""Sample curves used by tests, the acceptance suite and the CLI examples."""

import numpy as np

from .curve import DiscreteCurve, grid, make_curve, reparametrize_constant_speed


def circle(n: int, radius: float = 1.0, center=(0.0, 0.0)) -> DiscreteCurve:
    t = grid(n)
    return make_curve(np.column_stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)]))


def ellipse(n: int, a: float = 2.0, b: float = 1.0) -> DiscreteCurve:
    t = grid(n)
    return make_curve(np.column_stack([a * np.cos(t), b * np.sin(t)]))


def perturbed_circle(n: int, amplitude: float = 0.1, mode: int = 3, phase: float = 0.0) -> DiscreteCurve:
    """Polar curve r = 1 + amplitude * cos(mode*t + phase)."""
    t = grid(n)
    r = 1.0 + amplitude * np.cos(mode * t + phase)
    return make_curve(np.column_stack([r * np.cos(t), r * np.sin(t)]))


def limacon(n: int, a: float = 1.0, b: float = 1.5) -> DiscreteCurve:
    """Limacon r = b + a cos t; speed varies by the factor (a+b)/(b-a)."""
    t = grid(n)
    r = b + a * np.cos(t)
    return make_curve(np.column_stack([r * np.cos(t), r * np.sin(t)]))


def test_curves(n: int) -> dict[str, DiscreteCurve]:
    """The five constant-speed curves used by the verification sweeps."""
    return {
        "circle": circle(n),
        "ellipse": reparametrize_constant_speed(ellipse(n)),
        "perturbed3": reparametrize_constant_speed(perturbed_circle(n, 0.1, 3)),
        "perturbed5": reparametrize_constant_speed(perturbed_circle(n, 0.05, 5, 0.4)),
        "limacon": reparametrize_constant_speed(limacon(n)),
    }


test_curves.__test__ = False
