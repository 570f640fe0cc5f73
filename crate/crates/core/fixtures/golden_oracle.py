"""Independent reference output for the toy generator fixture.

Reads toy_generator.facgen and toy_latent.txt, evaluates the network with a
plain numpy scatter-add transposed convolution and writes the output as
little-endian float64, x-fastest, to toy_golden.f64.
"""
import struct
from pathlib import Path

import numpy as np

HERE = Path(__file__).parent


def read_facgen(path):
    b = path.read_bytes()
    assert b[:6] == b"FACGEN"
    pos = 6
    (version,) = struct.unpack_from("<H", b, pos)
    assert version == 1
    pos += 2
    shape = struct.unpack_from("<4I", b, pos)
    pos += 16
    (count,) = struct.unpack_from("<H", b, pos)
    pos += 2
    layers = []
    for _ in range(count):
        fields = struct.unpack_from("<11I", b, pos)
        pos += 44
        cin, cout = fields[0], fields[1]
        kernel, stride, padding = fields[2:5], fields[5:8], fields[8:11]
        (tag,) = struct.unpack_from("<B", b, pos)
        pos += 1
        (alpha,) = struct.unpack_from("<f", b, pos)
        pos += 4
        n = cin * cout * kernel[0] * kernel[1] * kernel[2]
        w = np.frombuffer(b, "<f4", n, pos).astype(np.float64).reshape(cin, cout, *kernel)
        pos += 4 * n
        bias = np.frombuffer(b, "<f4", cout, pos).astype(np.float64)
        pos += 4 * cout
        layers.append((w, bias, stride, padding, tag, alpha))
    assert pos == len(b)
    return shape, layers


def conv_transpose(x, w, bias, stride, padding):
    # x: (cin, D, H, W)
    cin, d, h, wd = x.shape
    _, cout, kd, kh, kw = w.shape
    full = np.zeros((cout, (d - 1) * stride[0] + kd, (h - 1) * stride[1] + kh, (wd - 1) * stride[2] + kw))
    for ci in range(cin):
        for z in range(d):
            for y in range(h):
                for xx in range(wd):
                    z0, y0, x0 = z * stride[0], y * stride[1], xx * stride[2]
                    full[:, z0:z0 + kd, y0:y0 + kh, x0:x0 + kw] += x[ci, z, y, xx] * w[ci]
    pd, ph, pw = padding
    out = full[:, pd:full.shape[1] - pd, ph:full.shape[2] - ph, pw:full.shape[3] - pw]
    return out + bias[:, None, None, None]


def main():
    (lx, ly, lz, c), layers = read_facgen(HERE / "toy_generator.facgen")
    latent = np.array([float(v) for v in (HERE / "toy_latent.txt").read_text().split()])
    x = latent.reshape(c, lz, ly, lx)
    for w, bias, stride, padding, tag, alpha in layers:
        x = conv_transpose(x, w, bias, stride, padding)
        if tag == 1:
            x = np.where(x >= 0, x, alpha * x)
        elif tag == 2:
            x = np.tanh(x)
    out = x[0]  # (nz, ny, nx): C order puts x fastest
    out.astype("<f8").tofile(HERE / "toy_golden.f64")
    print("golden shape (nz, ny, nx):", out.shape, "channel fraction:", (out > 0).mean())


if __name__ == "__main__":
    main()
