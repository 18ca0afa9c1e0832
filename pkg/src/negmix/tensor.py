"""Complex scalar/matrix/order-3 tensor arithmetic.

Tensors are dense ``numpy`` arrays of shape ``(n, n, n)``. Vectors are used
with the *bilinear* form ``u @ v`` (no conjugation), which is what makes
pseudo-orthonormal sets (``nu_i @ nu_j == delta_ij``) meaningful over C.

Square roots follow a single branch everywhere: for ``z = r e^{i theta}`` with
``theta`` in ``(-pi, pi]`` the root is ``r^{1/2} e^{i theta / 2}``. In
particular ``sqrt(-x) = i sqrt(x)`` for ``x > 0``, never ``-i sqrt(x)``.
"""

import json
from itertools import permutations

import numpy as np

_PERMS = tuple(permutations(range(3)))


def principal_sqrt(z):
    """Principal square root with argument in ``(-pi/2, pi/2]``.

    ``numpy.sqrt`` already uses the principal branch, but it honours the sign
    of a zero imaginary part, so ``sqrt(-4 - 0j)`` gives ``-2j``. Zero
    imaginary parts are mapped to ``+0.0`` first so negative reals always land
    on ``+i``.
    """
    z = np.asarray(z, dtype=complex)
    w = np.empty_like(z)
    w.real = z.real
    w.imag = z.imag + 0.0  # -0.0 + 0.0 == +0.0
    out = np.sqrt(w)
    return out[()] if out.ndim == 0 else out


def inv_sqrt(z):
    """``z^{-1/2}`` defined as ``1 / principal_sqrt(z)``."""
    return 1.0 / principal_sqrt(z)


def symmetrize(T):
    """Average a 3-way array over the six index permutations."""
    T = np.asarray(T)
    return sum(T.transpose(p) for p in _PERMS) / 6.0


def outer3(v):
    """Third tensor power ``v (x) v (x) v``."""
    v = np.asarray(v)
    return np.einsum("i,j,k->ijk", v, v, v)


def _check_tensor(T):
    T = np.asarray(T)
    if T.ndim != 3 or not (T.shape[0] == T.shape[1] == T.shape[2]):
        raise ValueError(f"expected an (n, n, n) tensor, got shape {T.shape}")
    return T


def apply3(T, A, B, C):
    """Multilinear map ``T(A, B, C)``.

    ``result[i, j, k] = sum_{p,q,r} T[p, q, r] A[p, i] B[q, j] C[r, k]``.
    Vectors are accepted in place of matrices and treated as single columns,
    the corresponding output axis is then dropped.
    """
    T = _check_tensor(T)
    n = T.shape[0]
    mats = [np.asarray(X) for X in (A, B, C)]
    for X in mats:
        if X.shape[0] != n:
            raise ValueError(f"map has {X.shape[0]} rows, tensor dimension is {n}")
    subs, out = [], ""
    for X, src_ax, dst_ax in zip(mats, "pqr", "ijk"):
        if X.ndim == 2:
            subs.append(src_ax + dst_ax)
            out += dst_ax
        else:
            subs.append(src_ax)
    return np.einsum(f"pqr,{subs[0]},{subs[1]},{subs[2]}->{out}", T, *mats)


def contract2(T, theta):
    """``T(I, theta, theta)``: the vector ``sum_{j,k} T[i, j, k] theta_j theta_k``."""
    T = _check_tensor(T)
    theta = np.asarray(theta)
    if theta.shape != (T.shape[0],):
        raise ValueError(f"theta has shape {theta.shape}, tensor dimension is {T.shape[0]}")
    return np.einsum("ijk,j,k->i", T, theta, theta)


def eval3(T, theta):
    """``T(theta, theta, theta)``."""
    return np.asarray(theta) @ contract2(T, theta)


def fro_norm(T):
    return float(np.sqrt(np.sum(np.abs(np.asarray(T)) ** 2)))


def pseudo_normalize(v):
    """Scale ``v`` so that the bilinear square ``v @ v`` equals one."""
    v = np.asarray(v, dtype=complex)
    return v / principal_sqrt(v @ v)


def is_symmetric(T, atol=1e-12):
    T = _check_tensor(T)
    return all(np.allclose(T, T.transpose(p), rtol=0, atol=atol) for p in _PERMS[1:])


# -- JSON ------------------------------------------------------------------

def _encode(x):
    x = complex(x)
    return [x.real, x.imag]


def _decode(x):
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValueError(f"complex entries must be [re, im], got {x!r}")
        return complex(x[0], x[1])
    return complex(x)


def tensor_to_json(T):
    """Serialize a vector, matrix or order-3 tensor as ``{"dim", "order", "entries"}``.

    Complex entries are ``[re, im]`` pairs; purely real arrays are written as
    plain numbers.
    """
    T = np.asarray(T)
    if np.iscomplexobj(T) and np.any(T.imag != 0):
        entries = np.vectorize(_encode, otypes=[object])(T).tolist()
    else:
        entries = np.asarray(T.real, dtype=float).tolist()
    return {"dim": int(T.shape[0]), "order": T.ndim, "entries": entries}


def _nesting(x):
    depth = 0
    while isinstance(x, list):
        if not x:
            break
        depth += 1
        x = x[0]
    return depth


def tensor_from_json(obj):
    """Inverse of :func:`tensor_to_json`; returns a real array when possible.

    Scalars and ``[re, im]`` pairs may be mixed. Without an ``"order"`` key
    the order is inferred from the nesting depth; a dim-2 array of depth 3 is
    read as a real order-3 tensor.
    """
    if isinstance(obj, str):
        obj = json.loads(obj)
    dim = int(obj["dim"])
    raw = obj["entries"]
    order = obj.get("order")
    if order is None:
        depth = _nesting(raw)
        if depth == 4:
            order = 3
        elif depth == 3:
            probe = raw[0][0]
            order = 2 if (len(probe) == 2 and dim != 2) else 3
        else:
            order = depth

    def walk(x, level):
        if level == order:
            return _decode(x)
        if not isinstance(x, list) or len(x) != dim:
            raise ValueError(f"expected {dim} entries at nesting level {level}")
        return [walk(y, level + 1) for y in x]

    arr = np.array(walk(raw, 0), dtype=complex).reshape((dim,) * order)
    if np.all(arr.imag == 0):
        return arr.real.copy()
    return arr
