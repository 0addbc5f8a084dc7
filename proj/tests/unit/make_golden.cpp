// Writes the toy denoiser's output for a zero latent and zero text embedding.
#include <cstdio>

#include "morphkit/toy_backend.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s OUT\n", argv[0]);
    return 1;
  }
  morphkit::ToyBackend backend(0, 50);
  morphkit::TextEmbedding zero;
  zero.data = morphkit::Tensor({morphkit::ToyBackend::kTextTokens, morphkit::ToyBackend::kTextDim});
  morphkit::Tensor out = backend.predict_noise(morphkit::Tensor(backend.latent_shape()), 25, zero, nullptr,
                                               morphkit::LatentRole::left());
  FILE* f = std::fopen(argv[1], "w");
  if (!f) return 1;
  for (float v : out.values()) std::fprintf(f, "%.9g\n", v);
  std::fclose(f);
  return 0;
}
