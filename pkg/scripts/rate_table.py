#!/usr/bin/env python3
"""Print per-cell ergodic rate and throughput of the 2x2 setups, interference limited.

Usage: python ./scripts/rate_table.py [lambda_per_km2]
"""
import os
import sys

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'sg_mimo.settings')
django.setup()

from cellular.services import metrics
from cellular.services.interference import NetworkModel
from cellular.services.schemes import Miso, Ostbc, Sdma, Simo, Siso, ZfRx, qam

SETUPS = [
    ('SIMO', Simo(2)),
    ('OSTBC', Ostbc(2, 2, 2, 2)),
    ('ZF-Rx', ZfRx(2, 2)),
    ('SDMA', Sdma(2, 2)),
    ('MISO', Miso(2)),
    ('SISO', Siso()),
]


def main():
    lam = float(sys.argv[1]) if len(sys.argv) > 1 else 10.0
    net = NetworkModel.from_units(lam, n0_dbm=None)
    mods = [qam(4), qam(16)]
    print('%-6s %4s %4s %10s %10s %10s' % ('setup', 'm_o', 'm_i', 'bits/s/Hz', '4-QAM', '16-QAM'))
    for name, scheme in SETUPS:
        gp = scheme.gamma_params()
        rate = metrics.ergodic_rate(net, gp, per_cell=True, bits=True)
        tput = [metrics.cell_throughput(metrics.asep(net, gp, m).value, m, gp) for m in mods]
        print('%-6s %4d %4d %10.4f %10.4f %10.4f' % (name, gp.m_o, gp.m_i, rate.value, *tput))
    return 0


if __name__ == '__main__':
    sys.exit(main())
