"""Heights and canonical heights for morphisms and correspondences over function fields."""

__version__ = "0.1.0"
