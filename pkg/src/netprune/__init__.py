"""Net & Prune approximation algorithms for distance problems."""
