#pragma once

#include <cstdint>

#include "ringid/keyset.hpp"
#include "ringid/latent.hpp"
#include "ringid/spectral.hpp"

namespace ringid {

// Writes the key into a copy of the latent: ring pattern into the ring
// channel's spectrum (chessboard-shifted when enabled, scaled by eta), dense
// Gaussian payload fields into the noise channels. With lossless enabled the
// ring channel survives the spectral write exactly because the symmetric mask
// receives conjugate-symmetric values; otherwise imaginary residue is
// discarded on the way back, which is the lossy behavior the baseline had.
Latent imprint(const Latent& latent, const KeyPair& key,
               const WatermarkConfig& config);

// Overwrites the masked spectrum coefficients of one channel with i.i.d.
// complex Gaussians of variance N^2 (per component N^2/2) and inverts keeping
// real parts. The standalone watermark used by the distribution experiments.
Latent imprint_iid_noise(const Latent& latent, const PixelMask& mask,
                         uint64_t seed, int channel = 0);

} // namespace ringid
