#include "rrls/container.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

namespace rrls {

namespace {

constexpr std::array<char, 4> kMagic = {'N', 'Y', 'S', 'F'};

class Writer {
 public:
  template <class T>
  void pod(const T& value) {
    buf_.append(reinterpret_cast<const char*>(&value), sizeof(T));
  }
  void str(const std::string& s) {
    pod<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void doubles(const double* data, std::size_t count) {
    buf_.append(reinterpret_cast<const char*>(data), count * sizeof(double));
  }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string bytes) : buf_(std::move(bytes)) {}
  template <class T>
  T pod() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string str() {
    const auto len = pod<std::uint32_t>();
    need(len);
    std::string s = buf_.substr(pos_, len);
    pos_ += len;
    return s;
  }
  void doubles(double* data, std::size_t count) {
    need(count * sizeof(double));
    std::memcpy(data, buf_.data() + pos_, count * sizeof(double));
    pos_ += count * sizeof(double);
  }
  Index count(std::uint64_t limit) {
    const auto v = pod<std::uint64_t>();
    if (v > limit) throw FormatError("container: implausible size field");
    return static_cast<Index>(v);
  }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  void need(std::size_t bytes) const {
    if (buf_.size() - pos_ < bytes) throw FormatError("container: truncated section");
  }
  std::string buf_;
  std::size_t pos_ = 0;
};

void section(std::ostream& out, const char* tag, const Writer& w) {
  out.write(tag, 4);
  const std::uint64_t len = w.bytes().size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(w.bytes().data(), static_cast<std::streamsize>(len));
}

Writer write_factors(const NystromFactors& f, const KernelSpec& kernel) {
  Writer w;
  w.pod<std::uint64_t>(static_cast<std::uint64_t>(f.n()));
  w.pod<std::uint64_t>(static_cast<std::uint64_t>(f.s()));
  w.pod<std::uint64_t>(static_cast<std::uint64_t>(f.rank));
  w.str(kernel.to_string());
  for (const Index j : f.landmark_indices) w.pod<std::int64_t>(static_cast<std::int64_t>(j));
  const RowMatrix c = f.C;
  w.doubles(c.data(), static_cast<std::size_t>(c.size()));
  const RowMatrix winv = f.Winv;
  w.doubles(winv.data(), static_cast<std::size_t>(winv.size()));
  return w;
}

// Bounded so that a corrupt header cannot trigger a multi-terabyte allocation;
// each size is also checked against the bytes actually present.
constexpr std::uint64_t kMaxDim = std::uint64_t{1} << 40;

NystromFactors read_factors(Reader& r, KernelSpec& kernel) {
  const Index n = r.count(kMaxDim);
  const Index s = r.count(kMaxDim);
  const Index rank = r.count(kMaxDim);
  kernel = KernelSpec::parse(r.str());
  const std::size_t payload = static_cast<std::size_t>(s) * 8 + static_cast<std::size_t>(n * s + s * s) * 8;
  if (n < 1 || s < 1 || s > n || rank > s || r.remaining() < payload) {
    throw FormatError("container: inconsistent factor header");
  }
  std::vector<Index> landmarks(static_cast<std::size_t>(s));
  for (auto& j : landmarks) {
    j = static_cast<Index>(r.pod<std::int64_t>());
    if (j < 0 || j >= n) throw FormatError("container: landmark index out of range");
  }
  RowMatrix c(n, s);
  r.doubles(c.data(), static_cast<std::size_t>(c.size()));
  RowMatrix winv(s, s);
  r.doubles(winv.data(), static_cast<std::size_t>(winv.size()));
  NystromFactors f = NystromFactors::from_columns(Matrix(c), std::move(landmarks));
  f.Winv = winv;  // keep the stored bits
  return f;
}

}  // namespace

void write_container(std::ostream& out, const ModelContainer& model) {
  if (model.krr && !model.factors) throw ArgumentError("a KRR model must be stored with its factors");
  out.write(kMagic.data(), 4);
  const std::uint32_t version = kContainerVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  if (model.factors) section(out, "FACT", write_factors(*model.factors, model.kernel));
  if (model.krr) {
    Writer w;
    w.pod<double>(model.krr->lambda);
    w.pod<std::uint64_t>(static_cast<std::uint64_t>(model.krr->alpha.size()));
    w.doubles(model.krr->alpha.data(), static_cast<std::size_t>(model.krr->alpha.size()));
    w.pod<std::uint64_t>(static_cast<std::uint64_t>(model.krr->predictor_weights.size()));
    w.doubles(model.krr->predictor_weights.data(), static_cast<std::size_t>(model.krr->predictor_weights.size()));
    section(out, "KRRM", w);
  }
  if (model.rff) {
    Writer w;
    w.pod<double>(model.rff->sigma);
    w.pod<std::uint64_t>(static_cast<std::uint64_t>(model.rff->features()));
    w.pod<std::uint64_t>(static_cast<std::uint64_t>(model.rff->dimension()));
    const RowMatrix freq = model.rff->frequencies;
    w.doubles(freq.data(), static_cast<std::size_t>(freq.size()));
    w.doubles(model.rff->phases.data(), static_cast<std::size_t>(model.rff->phases.size()));
    section(out, "RFFM", w);
  }
  if (!out) throw Error("container: write failed");
}

ModelContainer read_container(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kMagic) throw FormatError("container: bad magic bytes");
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!in) throw FormatError("container: truncated header");
  if (version != kContainerVersion) {
    throw FormatError("container: unsupported version " + std::to_string(version));
  }

  ModelContainer model;
  std::optional<Reader> pending_krr;
  while (true) {
    char tag[4];
    in.read(tag, 4);
    if (in.gcount() == 0 && in.eof()) break;
    if (in.gcount() != 4) throw FormatError("container: truncated section tag");
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (!in) throw FormatError("container: truncated section length");
    if (len > (std::uint64_t{1} << 44)) throw FormatError("container: implausible section length");
    std::string payload(static_cast<std::size_t>(len), '\0');
    in.read(payload.data(), static_cast<std::streamsize>(len));
    if (static_cast<std::uint64_t>(in.gcount()) != len) throw FormatError("container: truncated section");
    Reader r(std::move(payload));
    const std::string name(tag, 4);
    if (name == "FACT") {
      model.factors = read_factors(r, model.kernel);
    } else if (name == "KRRM") {
      pending_krr = std::move(r);
    } else if (name == "RFFM") {
      RFFMap map;
      map.sigma = r.pod<double>();
      const Index features = r.count(kMaxDim);
      const Index dim = r.count(kMaxDim);
      if (r.remaining() < static_cast<std::size_t>(features * dim + features) * 8) {
        throw FormatError("container: truncated feature map");
      }
      RowMatrix freq(features, dim);
      r.doubles(freq.data(), static_cast<std::size_t>(freq.size()));
      map.frequencies = freq;
      map.phases.resize(features);
      r.doubles(map.phases.data(), static_cast<std::size_t>(features));
      model.rff = std::move(map);
    }
  }
  if (pending_krr) {
    if (!model.factors) throw FormatError("container: KRR section without factors");
    Reader& r = *pending_krr;
    KRRModel krr;
    krr.lambda = r.pod<double>();
    const Index n = r.count(kMaxDim);
    if (n != model.factors->n() || r.remaining() < static_cast<std::size_t>(n) * 8) {
      throw FormatError("container: KRR coefficients do not match the factors");
    }
    krr.alpha.resize(n);
    r.doubles(krr.alpha.data(), static_cast<std::size_t>(n));
    const Index s = r.count(kMaxDim);
    if (s != model.factors->s()) throw FormatError("container: KRR weights do not match the factors");
    krr.predictor_weights.resize(s);
    r.doubles(krr.predictor_weights.data(), static_cast<std::size_t>(s));
    krr.landmark_indices = model.factors->landmark_indices;
    krr.kernel = model.kernel;
    model.krr = std::move(krr);
  }
  return model;
}

void save_container(const ModelContainer& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_container(out, model);
}

ModelContainer load_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_container(in);
}

}  // namespace rrls
