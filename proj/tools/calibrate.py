#!/usr/bin/env python3
"""Solves the surrogate backend constants and writes the calibration and
golden files under data/.

Each backend is calibrated so that its noise-free truth (cross-terms on)
hits the example targets exactly at an anchor design strictly inside the
bound box. The truth formulas here are written independently of the C++
backends and double as the oracle for the golden outputs.

Usage: tools/calibrate.py [--data DIR]
"""
import argparse
import configparser
import json
import math
import os

EJ_SCALE = 163460.0  # MHz nH: E_J = EJ_SCALE / L
EC_SCALE = 19366.0   # MHz fF: E_C = EC_SCALE / C


def transmon(l_nh, c_ff, junction_scale=1.0):
    ec = EC_SCALE / c_ff
    ej = junction_scale * EJ_SCALE / l_nh
    return math.sqrt(8.0 * ej * ec) - ec, ec


# ---------------------------------------------------------------- single

QR_TARGETS = dict(f_res=6000.0, f_qb=4000.0, alpha=200.0, chi=1.0, kappa_res=1.0)
QR_INITIAL = dict(l_res=7500.0, L_qb=12.1, w_qb=400.0, w_res_qb=100.0, l_res_tl=400.0)
QR_ANCHOR = dict(l_res=9000.0, w_qb=450.0, w_res_qb=200.0, l_res_tl=650.0)
QR_FIXED = dict(c_par=5.0, c_claw=0.02, eta=0.05, coupling_exponent=0.75, w_ref=100.0, w_qb_ref=400.0,
                kappa_exponent=2.0, l_ref=400.0, l_sat=700.0)


def qr_truth(k, x, cross=True):
    c = k['c_w'] * x['w_qb'] + k['c_par'] + (k['c_claw'] * x['w_res_qb'] if cross else 0.0)
    f_qb, alpha = transmon(x['L_qb'], c)
    f_res = k['v_res'] / (x['l_res'] + (k['eta'] * x['l_res_tl'] if cross else 0.0))
    g = k['g0'] * (x['w_res_qb'] / k['w_ref']) ** k['coupling_exponent'] * (k['w_qb_ref'] / x['w_qb'])
    delta = f_qb - f_res
    chi = g * g * alpha / (delta * (delta - alpha))
    kappa = k['kappa0'] * (x['l_res_tl'] / k['l_ref']) ** k['kappa_exponent']
    if cross:
        kappa /= 1.0 + (x['l_res_tl'] / k['l_sat']) ** 2
        pull = g * g / (f_res - f_qb)
        f_res, f_qb = f_res + pull, f_qb - pull
    if f_qb >= f_res:
        raise ValueError('mode order')
    return dict(f_res=f_res, f_qb=f_qb, alpha=alpha, chi=chi, kappa_res=kappa)


def calibrate_qr():
    k = dict(QR_FIXED)
    x = dict(QR_ANCHOR)
    t = QR_TARGETS
    pull = 0.0
    for _ in range(200):
        c = EC_SCALE / t['alpha']
        k['c_w'] = (c - k['c_par'] - k['c_claw'] * x['w_res_qb']) / x['w_qb']
        f_qb, f_res = t['f_qb'] + pull, t['f_res'] - pull
        ej = (f_qb + t['alpha']) ** 2 / (8.0 * t['alpha'])
        x['L_qb'] = EJ_SCALE / ej
        k['v_res'] = f_res * (x['l_res'] + k['eta'] * x['l_res_tl'])
        delta = f_qb - f_res
        g2 = t['chi'] * delta * (delta - t['alpha']) / t['alpha']
        k['g0'] = math.sqrt(g2) / ((x['w_res_qb'] / k['w_ref']) ** k['coupling_exponent'] * (k['w_qb_ref'] / x['w_qb']))
        pull = g2 / (f_res - f_qb)
        k['kappa0'] = t['kappa_res'] * (1.0 + (x['l_res_tl'] / k['l_sat']) ** 2) / (x['l_res_tl'] / k['l_ref']) ** 2
    return k, x


# ------------------------------------------------------------- two-qubit

TQ_TARGETS = dict(f_res_1=7120.0, f_res_2=7070.0, f_qb_1=4160.0, f_qb_2=4000.0, f_c=4000.0, alpha_1=220.0,
                  alpha_2=210.0, alpha_c=90.0, chi_1=0.17, chi_2=0.14, chi_c1=4.1, chi_c2=3.5)
TQ_INITIAL = dict(l_res_1=4200.0, l_res_2=4200.0, L_qb_1=10.0, L_qb_2=12.0, L_c=2.0, w_qb_1=170.0, w_qb_2=170.0,
                  w_c=250.0, w_res_qb_1=50.0, w_res_qb_2=50.0, w_c_qb_1=13.0, w_c_qb_2=15.0)
TQ_ANCHOR = dict(l_res_1=4150.0, l_res_2=4250.0, w_qb_1=190.0, w_qb_2=185.0, w_c=280.0, L_c=2.2,
                 w_res_qb_1=45.0, w_res_qb_2=55.0, w_c_qb_1=16.0, w_c_qb_2=12.0)
TQ_ARM_FIXED = dict(c_par=5.0, c_claw=0.02, eta=0.05, coupling_exponent=0.75, w_ref=50.0, w_qb_ref=170.0)
TQ_FIXED = dict(coupler_c_par=5.0, coupler_exponent=0.6, coupler_w_ref=13.0, detuning_floor=200.0)


def tq_truth(k, x, cross=True):
    out = {}
    for i in ('1', '2'):
        a = k['arm_' + i]
        w_rq = x['w_res_qb_' + i]
        c = a['c_w'] * x['w_qb_' + i] + a['c_par'] + (a['c_claw'] * w_rq if cross else 0.0)
        f_qb, alpha = transmon(x['L_qb_' + i], c)
        f_res = a['v_res'] / (x['l_res_' + i] + (a['eta'] * w_rq if cross else 0.0))
        g = a['g0'] * (w_rq / a['w_ref']) ** a['coupling_exponent'] * (a['w_qb_ref'] / x['w_qb_' + i])
        delta = f_qb - f_res
        chi = g * g * alpha / (delta * (delta - alpha))
        if cross:
            pull = g * g / (f_res - f_qb)
            f_res, f_qb = f_res + pull, f_qb - pull
        if f_qb >= f_res:
            raise ValueError('mode order')
        out.update({'f_res_' + i: f_res, 'f_qb_' + i: f_qb, 'alpha_' + i: alpha, 'chi_' + i: chi})
    f_c, alpha_c = transmon(x['L_c'], k['coupler_c_w'] * x['w_c'] + k['coupler_c_par'], k['coupler_junction_scale'])
    out['f_c'] = f_c
    out['alpha_c'] = alpha_c
    for i in ('1', '2'):
        g = k['coupler_g0_' + i] * (k['coupler_w_ref'] / x['w_c_qb_' + i]) ** k['coupler_exponent']
        out['chi_c' + i] = g * g / math.hypot(f_c - out['f_qb_' + i], k['detuning_floor'])
    return out


def calibrate_tq():
    t = TQ_TARGETS
    x = dict(TQ_ANCHOR)
    k = dict(TQ_FIXED)
    for i in ('1', '2'):
        a = dict(TQ_ARM_FIXED)
        alpha, f_qb_t, f_res_t, chi_t = t['alpha_' + i], t['f_qb_' + i], t['f_res_' + i], t['chi_' + i]
        w_rq, w_qb = x['w_res_qb_' + i], x['w_qb_' + i]
        pull = 0.0
        for _ in range(200):
            a['c_w'] = (EC_SCALE / alpha - a['c_par'] - a['c_claw'] * w_rq) / w_qb
            f_qb, f_res = f_qb_t + pull, f_res_t - pull
            x['L_qb_' + i] = EJ_SCALE / ((f_qb + alpha) ** 2 / (8.0 * alpha))
            a['v_res'] = f_res * (x['l_res_' + i] + a['eta'] * w_rq)
            delta = f_qb - f_res
            g2 = chi_t * delta * (delta - alpha) / alpha
            a['g0'] = math.sqrt(g2) / ((w_rq / a['w_ref']) ** a['coupling_exponent'] * (a['w_qb_ref'] / w_qb))
            pull = g2 / (f_res - f_qb)
        k['arm_' + i] = a
    k['coupler_c_w'] = (EC_SCALE / t['alpha_c'] - k['coupler_c_par']) / x['w_c']
    ej = (t['f_c'] + t['alpha_c']) ** 2 / (8.0 * t['alpha_c'])
    k['coupler_junction_scale'] = ej * x['L_c'] / EJ_SCALE
    for i in ('1', '2'):
        g2 = t['chi_c' + i] * math.hypot(t['f_c'] - t['f_qb_' + i], k['detuning_floor'])
        k['coupler_g0_' + i] = math.sqrt(g2) / (k['coupler_w_ref'] / x['w_c_qb_' + i]) ** k['coupler_exponent']
    return k, x


# ---------------------------------------------------- capacitance and T1

CAP_TARGETS = dict(C_coupling=5.0)
CAP_INITIAL = dict(d_coupling=40.0)
CAP_ANCHOR = dict(d_coupling=12.0)
CAP_FIXED = dict(d_ref=10.0, epsilon=0.1)


def cap_truth(k, x, cross=True):
    d = x['d_coupling']
    eps = k['epsilon'] if cross else 0.0
    return dict(C_coupling=k['c0'] / math.sqrt(d / k['d_ref']) * (1.0 + eps * d / k['d_ref']))


def calibrate_cap():
    k = dict(CAP_FIXED)
    x = dict(CAP_ANCHOR)
    k['c0'] = 1.0
    k['c0'] = CAP_TARGETS['C_coupling'] / cap_truth(k, x)['C_coupling']
    return k, x


T1_TARGETS = dict(T1_limit=500.0)
T1_INITIAL = dict(d_tip=30.0)
T1_ANCHOR = dict(d_tip=55.0)
T1_FIXED = dict(c_sigma=90.0, d_ref=20.0, d_offset=8.0, coupling_exponent=1.5, frequency=4000.0, impedance=50.0)


def t1_truth(k, x, cross=True):
    cc = k['cc0'] * (k['d_ref'] / (x['d_tip'] + k['d_offset'])) ** k['coupling_exponent']
    omega = 2.0 * math.pi * k['frequency'] * 1e6
    t1 = (k['c_sigma'] * 1e-15) / (omega ** 2 * (cc * 1e-15) ** 2 * k['impedance'])
    return dict(T1_limit=t1 * 1e6)


def calibrate_t1():
    k = dict(T1_FIXED)
    x = dict(T1_ANCHOR)
    k['cc0'] = 1.0
    k['cc0'] = math.sqrt(t1_truth(k, x)['T1_limit'] / T1_TARGETS['T1_limit'])
    return k, x


# ------------------------------------------------------------------ I/O

def write_ini(path, sections, comment):
    cp = configparser.ConfigParser()
    cp.optionxform = str
    for name, values in sections.items():
        cp[name] = {key: repr(float(v)) for key, v in values.items()}
    with open(path, 'w') as f:
        f.write('# ' + comment + '\n# Written by tools/calibrate.py; do not edit by hand.\n\n')
        cp.write(f)


def golden(truth, k, points):
    out = {}
    for label, (x, cross) in points.items():
        out[label] = {'x': x, 'cross_terms': cross, 'y': truth(k, x, cross)}
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.split('\n\n')[0])
    ap.add_argument('--data', default=os.path.join(os.path.dirname(__file__), '..', 'data'))
    args = ap.parse_args()
    cal_dir = os.path.join(args.data, 'calibration')
    gold_dir = os.path.join(args.data, 'golden')
    os.makedirs(cal_dir, exist_ok=True)
    os.makedirs(gold_dir, exist_ok=True)

    qr, qr_anchor = calibrate_qr()
    write_ini(os.path.join(cal_dir, 'qubit_resonator.ini'), {'constants': qr, 'anchor': qr_anchor},
              'Qubit-resonator surrogate constants (MHz, um, nH, fF).')
    tq, tq_anchor = calibrate_tq()
    sections = {'coupler': {key: v for key, v in tq.items() if not key.startswith('arm_')},
                'arm_1': tq['arm_1'], 'arm_2': tq['arm_2'], 'anchor': tq_anchor}
    write_ini(os.path.join(cal_dir, 'two_qubit.ini'), sections,
              'Two-qubit coupler surrogate constants (MHz, um, nH, fF).')
    cap, cap_anchor = calibrate_cap()
    write_ini(os.path.join(cal_dir, 'capacitance.ini'), {'constants': cap, 'anchor': cap_anchor},
              'Coupling capacitance surrogate constants (fF, um).')
    t1, t1_anchor = calibrate_t1()
    write_ini(os.path.join(cal_dir, 'charge_line_t1.ini'), {'constants': t1, 'anchor': t1_anchor},
              'Charge-line T1 surrogate constants (fF, um, MHz, ohm; T1 in us).')

    gold = {
        'qubit_resonator': golden(qr_truth, qr, {
            'initial': (QR_INITIAL, True), 'initial_no_cross': (QR_INITIAL, False),
            'anchor': (qr_anchor, True)}),
        'two_qubit': golden(tq_truth, tq, {
            'initial': (TQ_INITIAL, True), 'initial_no_cross': (TQ_INITIAL, False), 'anchor': (tq_anchor, True)}),
        'capacitance': golden(cap_truth, cap, {
            'initial': (CAP_INITIAL, True), 'initial_no_cross': (CAP_INITIAL, False), 'anchor': (cap_anchor, True)}),
        'charge_line_t1': golden(t1_truth, t1, {'initial': (T1_INITIAL, True), 'anchor': (t1_anchor, True)}),
    }
    for name, table in gold.items():
        with open(os.path.join(gold_dir, name + '.json'), 'w') as f:
            json.dump(table, f, indent=2, sort_keys=True)
            f.write('\n')


if __name__ == '__main__':
    main()
