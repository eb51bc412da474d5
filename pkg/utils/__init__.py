# Channel model, Gaussian information kernel, simulator, sweeps and file formats
