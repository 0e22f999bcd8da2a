# Measurement ensembles, complex embedding, frame bounds and instance storage
