#pragma once

#include <cstdint>
#include <string>

#include "core/dataset.hpp"

namespace dfl {

// Deterministic MNIST-shaped stand-in corpus: 28x28 grayscale digits
// rendered from parametric stroke glyphs with per-sample affine jitter,
// stroke-width variation and pixel noise. Useful where the real IDX files
// are not available; the pipeline treats both identically.
LabeledDataset make_synth_digits(int count, std::uint64_t seed, SourceTag tag);

// Writes train/test IDX files under dir using the conventional MNIST
// file names (train-images-idx3-ubyte, train-labels-idx1-ubyte,
// t10k-images-idx3-ubyte, t10k-labels-idx1-ubyte).
void write_synth_corpus(const std::string& dir, int train_count, int test_count,
                        std::uint64_t seed);

} // namespace dfl
