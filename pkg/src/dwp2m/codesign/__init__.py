"""Hardware-aware training of a small spiking network with an in-pixel first layer."""
