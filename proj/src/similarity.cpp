#include "vidmod/similarity.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

namespace vidmod {

std::vector<std::string> ReferenceEmbedder::tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::size_t ReferenceEmbedder::token_bucket(std::string_view token) {
    // FNV-1a 64 with a fixed seed basis.
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : token) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return static_cast<std::size_t>(h % kDimension);
}

std::vector<double> ReferenceEmbedder::embed(std::string_view text) const {
    std::vector<double> v(kDimension, 0.0);
    for (const auto& tok : tokenize(text)) {
        v[token_bucket(tok)] += 1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm == 0.0) return v;  // degenerate: no tokens
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

namespace {

// Splits "http://host:port/path" into host part and path part.
std::pair<std::string, std::string> split_url(const std::string& url) {
    std::size_t scheme = url.find("://");
    std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
    std::size_t slash = url.find('/', host_start);
    if (slash == std::string::npos) return {url, "/embed"};
    return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

HttpEmbedder::HttpEmbedder(std::string url, int timeout_sec)
    : timeout_sec_(timeout_sec) {
    std::tie(host_, path_) = split_url(url);
}

std::size_t HttpEmbedder::dimension() const { return fallback_.dimension(); }

std::vector<double> HttpEmbedder::embed(std::string_view text) const {
    httplib::Client client(host_);
    client.set_connection_timeout(timeout_sec_, 0);
    client.set_read_timeout(timeout_sec_, 0);
    nlohmann::json req = {{"text", std::string(text)}};
    auto res = client.Post(path_, req.dump(), "application/json");
    if (res && res->status == 200) {
        try {
            auto body = nlohmann::json::parse(res->body);
            auto vec = body.at("vector").get<std::vector<double>>();
            if (!vec.empty()) return vec;
        } catch (const nlohmann::json::exception&) {
            // fall through to fallback
        }
    }
    std::cerr << "warning: embedder at " << host_
              << " unavailable, using reference embedder\n";
    return fallback_.embed(text);
}

std::unique_ptr<EmbeddingProvider> make_embedder_from_env() {
    if (const char* url = std::getenv("EMBEDDER_URL"); url && *url) {
        return std::make_unique<HttpEmbedder>(url);
    }
    return std::make_unique<ReferenceEmbedder>();
}

bool is_degenerate(std::span<const double> v) {
    for (double x : v) {
        if (x != 0.0) return false;
    }
    return true;
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw std::invalid_argument("cosine: dimension mismatch");
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

}  // namespace vidmod
