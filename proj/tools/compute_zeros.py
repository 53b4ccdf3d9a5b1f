#!/usr/bin/env python3
"""Locate low-lying zeros of L(s, chi) for a real primitive character.

Writes the zero-file format read by `race zeros` / race_zeros_load:
    modulus <q>
    chi <conrey index>
    <gamma>
    ...

For a real primitive character the completed L-function is real on the
critical line, so zeros are bracketed by sign changes and then polished.
"""
import argparse
import mpmath as mp

# (q, conrey index, parity, values on 0..q-1)
CHARS = {
    3: (2, 1, [0, 1, -1]),
    4: (3, 1, [0, 1, 0, -1]),
    5: (4, 0, [0, 1, -1, -1, 1]),
}


def completed(q, parity, values, t):
    s = mp.mpf(0.5) + 1j * t
    h = (s + parity) / 2
    val = (q / mp.pi) ** h * mp.gamma(h) * mp.dirichlet(s, values)
    return mp.re(val)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--q", type=int, default=4)
    ap.add_argument("--height", type=float, default=100.0)
    ap.add_argument("--step", type=float, default=0.02)
    args = ap.parse_args()
    mp.mp.dps = 25
    idx, parity, values = CHARS[args.q]
    f = lambda t: completed(args.q, parity, values, t)
    zeros = []
    t0, f0 = args.step, f(args.step)
    t = t0
    while t < args.height:
        t1 = t + args.step
        f1 = f(t1)
        if f0 * f1 < 0:
            zeros.append(mp.findroot(f, (t, t1), solver="anderson"))
        t, f0 = t1, f1
    print(f"# zeros of L(s, chi) mod {args.q}, 0 < gamma < {args.height}")
    print(f"modulus {args.q}")
    print(f"chi {idx}")
    for z in zeros:
        print(mp.nstr(z, 17, strip_zeros=False))


if __name__ == "__main__":
    main()
