"""Pure-Python counting kernels over concomitant ranks.

These are the reference fallback for the compiled ``_kernels`` extension and
expose the same four functions. ``ranks`` is any sequence holding a
permutation of ``1..n``. Python integers make every count exact for any n.
"""


def concordant_count_naive(ranks):
    """Number of pairs ``j < i`` with ``ranks[j] < ranks[i]`` by direct enumeration."""
    r = [int(x) for x in ranks]
    n = len(r)
    total = 0
    for i in range(1, n):
        ri = r[i]
        for j in range(i):
            if r[j] < ri:
                total += 1
    return total


def concordant_count(ranks):
    """Same count as :func:`concordant_count_naive` via bottom-up merge sort.

    Inversions are counted while merging; the concordant count is the
    complement ``n(n-1)/2 - inversions``.
    """
    a = [int(x) for x in ranks]
    n = len(a)
    buf = [0] * n
    inversions = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if a[i] <= a[j]:
                    buf[k] = a[i]
                    i += 1
                else:
                    buf[k] = a[j]
                    inversions += mid - i
                    j += 1
                k += 1
            while i < mid:
                buf[k] = a[i]
                i += 1
                k += 1
            while j < hi:
                buf[k] = a[j]
                j += 1
                k += 1
        a, buf = buf, a
        width *= 2
    return n * (n - 1) // 2 - inversions


def weighted_t_naive(ranks):
    """Weighted concordance sum ``sum_{j<i} (n - i + j) [r_j <= r_i]`` (1-based i, j)."""
    r = [int(x) for x in ranks]
    n = len(r)
    total = 0
    for i in range(2, n + 1):
        ri = r[i - 1]
        for j in range(1, i):
            if r[j - 1] <= ri:
                total += n - i + j
    return total


def weighted_t(ranks):
    """Weighted concordance sum in O(n log n) with two Fenwick trees.

    Walking positions ``i = 1..n``, one tree counts earlier positions with a
    smaller rank, the other sums those positions, so position ``i``
    contributes ``(n - i) * count + sum``.
    """
    r = [int(x) for x in ranks]
    n = len(r)
    cnt = [0] * (n + 1)
    pos = [0] * (n + 1)
    total = 0
    for i in range(1, n + 1):
        ri = r[i - 1]
        c = 0
        s = 0
        k = ri
        while k > 0:
            c += cnt[k]
            s += pos[k]
            k -= k & -k
        total += (n - i) * c + s
        k = ri
        while k <= n:
            cnt[k] += 1
            pos[k] += i
            k += k & -k
    return total
