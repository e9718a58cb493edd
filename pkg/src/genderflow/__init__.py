"""Gender-filtered self-training data augmentation and gender accuracy evaluation for MT."""

from genderflow.gender import Gender

__version__ = "0.1.0"

__all__ = ["Gender", "__version__"]
