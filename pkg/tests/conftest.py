"""
Pytest configuration and fixtures for contact-duality tests.

This file is automatically loaded by pytest and provides:
- Custom markers
- Shared fixtures (hand-made event logs, small topologies)
- Settings isolation
"""
import pytest


def pytest_configure(config):
    """Configure custom markers."""
    config.addinivalue_line(
        "markers", "slow: Slow tests (>5 seconds)"
    )
    config.addinivalue_line(
        "markers", "statistical: Monte Carlo tests with a fixed seed and SE-based tolerance"
    )
    config.addinivalue_line(
        "markers", "performance: Performance benchmarks"
    )


@pytest.fixture(autouse=True)
def fresh_settings():
    """Drop the cached settings singleton around every test."""
    from contact_duality.core.config import reset_config

    reset_config()
    yield
    reset_config()


# Sites a..e of the path are ids 0..4.
A, B, C, D, E = range(5)


@pytest.fixture
def path5():
    """Path a - b - c - d - e."""
    from contact_duality.topology import make_path

    return make_path(5, labels=list("abcde"))


@pytest.fixture
def worked_log(path5):
    """
    Hand-made log on the path with lambda1 = 1, lambda2 = 2, horizon 2.

    From xi_0 = 21012 it reaches 10101 at time 1; the ancestor list of
    (c, 2) at dual time 1 is ((b,1),(a,2),(c,1),(d,1),(e,2),(d,2)).
    """
    from contact_duality.graphical import Event, EventKind, EventLog

    def death(t, x):
        return Event(t, EventKind.DEATH, x)

    def arrow(t, x, y, two_only=False):
        return Event(t, EventKind.ARROW, x, y, two_only)

    events = [
        death(0.1, A),
        arrow(0.2, B, A),
        arrow(0.3, B, C),
        death(0.4, E),
        arrow(0.5, D, E),
        death(0.6, B),
        death(0.7, D),
        arrow(1.3, A, B, two_only=True),
        arrow(1.4, D, E),
        arrow(1.5, E, D, two_only=True),
        arrow(1.6, D, C),
        arrow(1.7, C, B),
        death(1.8, C),
        arrow(1.9, B, C),
    ]
    return EventLog.from_events(path5, events, horizon=2.0, lambda1=1.0, lambda2=2.0)


@pytest.fixture
def blocked_refill_log():
    """
    Star log where an occupied 1 refills the hub ahead of a 2 and is then
    stopped by a 2-only arrow to the base leaf.

    Hub 0, leaves 1..3; base point (1, 1.0); xi_0 = 0012 gives xi_1(1) = 0,
    while the flat scan of the ancestor pairs reads the 2 at site 3.
    """
    from contact_duality.graphical import Event, EventKind, EventLog
    from contact_duality.topology import make_star

    topo = make_star(4)
    events = [
        Event(0.2, EventKind.ARROW, 2, 0),
        Event(0.3, EventKind.ARROW, 3, 0),
        Event(0.5, EventKind.ARROW, 0, 1, True),
    ]
    return EventLog.from_events(topo, events, horizon=1.0, lambda1=1.0, lambda2=2.0)
