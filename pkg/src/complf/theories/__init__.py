"""Theory files shipped with the package."""
