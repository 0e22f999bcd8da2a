# Settings, seed derivation and shared exceptions
