"""Term-by-term reference evaluation of the link, throughput and drop-rate formulas.

Deliberately shares no code with ``satqos``: everything is evaluated in
50-digit mpmath arithmetic straight from the textbook expressions.
"""

import mpmath as mp

mp.mp.dps = 50

C = mp.mpf(299792458)
K_B = mp.mpf("1.380649e-23")
MU = mp.mpf("398600.4418")


def fspl(distance_km, freq_hz):
    d_m = mp.mpf(distance_km) * 1000
    return (4 * mp.pi * d_m * mp.mpf(freq_hz) / C) ** 2


def t_trans(d_bits, bandwidth, p_t, g_max, tau, loss, physical=False):
    noise = K_B * mp.mpf(tau) * mp.mpf(loss)
    if physical:
        noise = noise * mp.mpf(bandwidth)
    snr = mp.mpf(p_t) * mp.mpf(g_max) ** 2 / noise
    rate = mp.mpf(bandwidth) * mp.log(1 + snr, 2)
    return mp.mpf(d_bits) / rate


def throughput(windows, bandwidth):
    num = mp.fsum(mp.mpf(tc) for tc, _ in windows) * mp.mpf(bandwidth)
    den = mp.fsum(mp.mpf(tc) + mp.mpf(tt) for tc, tt in windows)
    return num / den


def drop_rate(lost, delivered):
    return mp.mpf(lost) / mp.mpf(delivered)


def period(a_km):
    return 2 * mp.pi * mp.sqrt(mp.mpf(a_km) ** 3 / MU)


def circular_speed(a_km):
    return mp.sqrt(MU / mp.mpf(a_km))
