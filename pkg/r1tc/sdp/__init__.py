"""Small semidefinite programming solver."""
