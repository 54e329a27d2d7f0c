#include "fleet/event_log.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>

#include "fleet/canonical.hpp"
#include "fleet/error.hpp"

namespace fleet {

struct Sha256::Impl {
  EVP_MD_CTX* ctx = nullptr;
  Impl() : ctx(EVP_MD_CTX_new()) {
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
  }
  ~Impl() { EVP_MD_CTX_free(ctx); }
};

Sha256::Sha256() : impl_(std::make_unique<Impl>()) {}
Sha256::~Sha256() = default;

Sha256::Sha256(const Sha256& other) : impl_(std::make_unique<Impl>()) {
  EVP_MD_CTX_copy_ex(impl_->ctx, other.impl_->ctx);
}

Sha256& Sha256::operator=(const Sha256& other) {
  if (this != &other) EVP_MD_CTX_copy_ex(impl_->ctx, other.impl_->ctx);
  return *this;
}

void Sha256::update(std::string_view data) {
  if (EVP_DigestUpdate(impl_->ctx, data.data(), data.size()) != 1) throw Error("sha256 update failed");
}

std::string Sha256::hex() const {
  Impl copy;
  EVP_MD_CTX_copy_ex(copy.ctx, impl_->ctx);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(copy.ctx, md.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data);
  return h.hex();
}

std::string digest_path(const std::string& log_path) { return log_path + ".sha256"; }

EventLog::EventLog(std::string path) : path_(std::move(path)) {
  out_.open(*path_, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error("cannot open log '" + *path_ + "'");
}

std::size_t EventLog::append(const Json& record) { return append_line(canonical_serialize(record)); }

std::size_t EventLog::append_line(std::string line) {
  line.push_back('\n');
  if (path_) {
    out_.write(line.data(), static_cast<std::streamsize>(line.size()));
    if (!out_) throw Error("log write failed");
  }
  hash_.update(line);
  line.pop_back();
  lines_.push_back(std::move(line));
  return lines_.size() - 1;
}

void EventLog::finalize() {
  if (!path_) return;
  out_.flush();
  if (!out_) throw Error("log flush failed");
  std::ofstream side(digest_path(*path_), std::ios::binary | std::ios::trunc);
  side << digest() << '\n';
  if (!side) throw Error("cannot write digest file");
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

}  // namespace fleet
