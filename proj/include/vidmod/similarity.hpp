#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vidmod {

// Text-embedding provider behind the reasoning-consistency reward. The
// production encoder is an external service; the reference implementation is
// a deterministic hashed bag-of-tokens vector so tests stay hermetic.

class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dimension() const = 0;
    // L2-normalized vector; empty/whitespace-only text maps to the zero
    // vector (degenerate).
    virtual std::vector<double> embed(std::string_view text) const = 0;
};

class ReferenceEmbedder final : public EmbeddingProvider {
  public:
    static constexpr std::size_t kDimension = 256;

    std::size_t dimension() const override { return kDimension; }
    std::vector<double> embed(std::string_view text) const override;

    // Tokens are lowercased maximal alphanumeric runs.
    static std::vector<std::string> tokenize(std::string_view text);
    // Fixed hash used to bucket tokens; exposed for collision-free fixtures.
    static std::size_t token_bucket(std::string_view token);
};

// Queries `url` with POST {"text": ...} expecting {"vector": [...]}; any
// transport error or malformed response falls back to ReferenceEmbedder with
// a warning on stderr.
class HttpEmbedder final : public EmbeddingProvider {
  public:
    explicit HttpEmbedder(std::string url, int timeout_sec = 2);

    std::size_t dimension() const override;
    std::vector<double> embed(std::string_view text) const override;

  private:
    std::string host_;
    std::string path_;
    int timeout_sec_;
    ReferenceEmbedder fallback_;
};

// HttpEmbedder when EMBEDDER_URL is set, ReferenceEmbedder otherwise.
std::unique_ptr<EmbeddingProvider> make_embedder_from_env();

bool is_degenerate(std::span<const double> v);

// u.v / (|u||v|); 0 when either vector is zero. Throws on dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

}  // namespace vidmod
