#include "emberops/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "emberops/errors.hpp"

namespace emberops {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * i);
    return std::bit_cast<double>(v);
  }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw CheckpointMismatch("checkpoint is truncated");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const Checkpoint& ck) {
  const NetworkShape& s = ck.network.shape();
  std::string out = "EMBR";
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(s.input_dim));
  put_u32(out, static_cast<std::uint32_t>(s.fleet_size));
  const std::uint32_t dims[] = {static_cast<std::uint32_t>(s.input_dim), static_cast<std::uint32_t>(s.hidden),
                                static_cast<std::uint32_t>(s.hidden), static_cast<std::uint32_t>(kHeadSize), 1u};
  put_u32(out, static_cast<std::uint32_t>(std::size(dims)));
  for (std::uint32_t d : dims) put_u32(out, d);
  for (double w : ck.network.params()) put_f64(out, w);
  const std::vector<double> norm = ck.normalization.as_vector();
  put_u32(out, static_cast<std::uint32_t>(norm.size()));
  for (double v : norm) put_f64(out, v);
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.raw(4) != "EMBR") throw CheckpointMismatch("bad magic, not a checkpoint file");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw CheckpointMismatch("unsupported checkpoint version " + std::to_string(version));
  NetworkShape shape;
  shape.input_dim = static_cast<int>(r.u32());
  shape.fleet_size = static_cast<int>(r.u32());
  const std::uint32_t layers = r.u32();
  if (layers != 5) throw CheckpointMismatch("unexpected layer count");
  std::uint32_t dims[5];
  for (auto& d : dims) d = r.u32();
  if (static_cast<int>(dims[0]) != shape.input_dim || dims[1] != dims[2] || dims[3] != kHeadSize || dims[4] != 1)
    throw CheckpointMismatch("layer dimensions are inconsistent");
  shape.hidden = static_cast<int>(dims[1]);
  if (shape.input_dim <= 0 || shape.fleet_size <= 0 || shape.hidden <= 0 || shape.input_dim > (1 << 20) ||
      shape.hidden > (1 << 14) || shape.fleet_size > (1 << 10))
    throw CheckpointMismatch("layer dimensions are out of range");

  Checkpoint ck{PolicyNetwork(shape), {}};
  for (double& w : ck.network.params()) w = r.f64();
  const std::uint32_t nconst = r.u32();
  std::vector<double> norm(nconst);
  for (double& v : norm) v = r.f64();
  ck.normalization = NormalizationConstants::from_vector(norm);
  if (!r.at_end()) throw CheckpointMismatch("trailing bytes after checkpoint");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  const std::string bytes = encode_checkpoint(ck);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("cannot write checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

void check_compatible(const Checkpoint& ck, const Scenario& scenario) {
  const int fleet = static_cast<int>(scenario.fleet.size());
  if (ck.network.shape().fleet_size != fleet)
    throw CheckpointMismatch("checkpoint fleet size " + std::to_string(ck.network.shape().fleet_size) +
                             " does not match scenario fleet size " + std::to_string(fleet));
  if (ck.network.shape().input_dim != observation_size(fleet))
    throw CheckpointMismatch("checkpoint input_dim does not match the scenario observation length");
  if (!(ck.normalization == NormalizationConstants::for_scenario(scenario)))
    throw CheckpointMismatch("checkpoint normalisation constants differ from the scenario");
}

}  // namespace emberops
