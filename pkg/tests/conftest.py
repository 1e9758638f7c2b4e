import pytest
from hypothesis import settings

from heritage_flow.geofence import Site, SiteCatalog, TicketGroup

settings.register_profile("thorough", max_examples=200)
settings.register_profile("default", max_examples=60)
settings.load_profile("default")


@pytest.fixture
def three_site_catalog():
    """Three sites spaced ~110 km apart; no buffer overlap."""
    return SiteCatalog(
        [
            Site("alpha", "Alpha", 0.0, 0.0, 2.0, TicketGroup.BTC1),
            Site("beta", "Beta", 1.0, 0.0, 2.0, TicketGroup.BTC1),
            Site("gamma", "Gamma", 0.0, 1.0, 2.0, TicketGroup.UNESCO),
        ]
    )


@pytest.fixture
def grid_catalog():
    """12 sites on a 0.5-degree grid (~55 km spacing), 2 km buffers."""
    sites = []
    for i in range(12):
        lat = (i // 4) * 0.5
        lon = (i % 4) * 0.5
        sites.append(Site(f"s{i:02d}", f"Site {i}", lat, lon, 2.0))
    return SiteCatalog(sites)
