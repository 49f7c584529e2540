"""Initialize pytests."""
