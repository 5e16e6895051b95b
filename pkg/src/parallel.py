"""
Chunked, thread-parallel evaluation helpers.
"""

import logging
from typing import Callable, Optional

import numpy as np
from joblib import Parallel, delayed

from src.config import CHUNK_SIZE, DEFAULT_THREADS

logger = logging.getLogger(__name__)


def chunked_rows(func: Callable[[slice], np.ndarray], n_rows: int,
                 threads: Optional[int] = None, chunk_size: Optional[int] = None) -> np.ndarray:
    """
    Evaluate func over disjoint row blocks and stack the results.

    Args:
        func: Callable mapping a row slice to the array block for those rows
        n_rows: Total number of rows
        threads: Worker count (defaults to the configured thread count)
        chunk_size: Rows per task (defaults to the configured chunk size)

    Returns:
        The row-wise concatenation of all blocks
    """
    threads = threads or DEFAULT_THREADS
    chunk_size = chunk_size or CHUNK_SIZE
    slices = [slice(start, min(start + chunk_size, n_rows)) for start in range(0, n_rows, chunk_size)]
    if not slices:
        return func(slice(0, 0))
    if threads == 1 or len(slices) == 1:
        blocks = [func(s) for s in slices]
    else:
        logger.debug(f"Evaluating {n_rows} rows in {len(slices)} chunks on {threads} threads")
        # numpy releases the GIL inside the heavy kernels
        blocks = Parallel(n_jobs=threads, backend="threading")(delayed(func)(s) for s in slices)
    return np.concatenate(blocks, axis=0)
