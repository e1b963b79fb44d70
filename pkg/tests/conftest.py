import os

# Pin BLAS pools before numpy loads: timing-sensitive tests measure
# single-threaded cost, and tiny matmuls are faster without a pool anyway.
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")
