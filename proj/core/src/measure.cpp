#include "compobs/measure.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <utility>

#include "compobs/rng.hpp"

namespace compobs {

namespace {

// Entries are laid down row-major from one stream per block, so a block is a
// pure function of its stream seed regardless of sharing mode.
Eigen::MatrixXd gaussian_block(int M, int N, std::uint64_t stream_seed) {
  RandomStream stream(stream_seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(M));
  Eigen::MatrixXd C(M, N);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < N; ++j) C(i, j) = scale * stream.next_gaussian();
  return C;
}

}  // namespace

MeasurementEnsemble MeasurementEnsemble::from_blocks(std::vector<Eigen::MatrixXd> blocks,
                                                     Sharing sharing) {
  if (blocks.empty()) throw DimensionError("ensemble needs at least one block");
  const Eigen::Index rows = blocks.front().rows();
  const Eigen::Index cols = blocks.front().cols();
  if (rows < 1 || cols < 1) throw DimensionError("measurement blocks must be non-empty");
  for (const auto& block : blocks) {
    if (block.rows() != rows || block.cols() != cols)
      throw DimensionError("all measurement blocks must share one shape");
  }
  if (sharing == Sharing::Identical) {
    for (const auto& block : blocks) {
      if ((block - blocks.front()).cwiseAbs().maxCoeff() != 0.0)
        throw ParameterError("identical sharing requires bitwise-equal blocks");
    }
  }

  MeasurementEnsemble e;
  e.blocks_ = std::move(blocks);
  e.sharing_ = sharing;
  return e;
}

MeasurementEnsemble dense_gaussian_ensemble(int M, int N, const SampleSet& omega,
                                            Sharing sharing, std::uint64_t seed) {
  if (M < 1 || N < 1) throw DimensionError("measurement blocks must be non-empty");

  const int K = omega.size();
  MeasurementEnsemble e;
  e.blocks_.reserve(static_cast<std::size_t>(K));
  if (sharing == Sharing::Identical) {
    const Eigen::MatrixXd C = gaussian_block(M, N, derive_seed(seed, 0));
    for (int i = 0; i < K; ++i) e.blocks_.push_back(C);
  } else {
    for (int i = 0; i < K; ++i)
      e.blocks_.push_back(gaussian_block(M, N, derive_seed(seed, static_cast<std::uint64_t>(i))));
  }
  e.sharing_ = sharing;
  e.generator_ = GeneratorKind::DenseGaussian;
  e.seed_ = seed;
  return e;
}

Eigen::RowVectorXd line_row(const GridDims& grid, double theta, double ax, double ay,
                            double decay) {
  check_grid(grid);
  if (decay <= 0.0) throw ParameterError("line decay constant must be positive");

  // Unit normal of a line with direction (cos theta, sin theta).
  const double nx = -std::sin(theta);
  const double ny = std::cos(theta);
  Eigen::RowVectorXd row(grid.size());
  for (int node = 0; node < grid.size(); ++node) {
    const double x = static_cast<double>(grid.col_of(node));
    const double y = static_cast<double>(grid.row_of(node));
    const double dist = std::abs((x - ax) * nx + (y - ay) * ny);
    row(node) = std::exp(-dist / decay);
  }
  return row;
}

MeasurementEnsemble line_ensemble(int M, const GridDims& grid, const SampleSet& omega,
                                  double decay, std::uint64_t seed) {
  check_grid(grid);
  if (M < 1) throw DimensionError("measurement blocks must be non-empty");
  if (decay <= 0.0) throw ParameterError("line decay constant must be positive");

  const int K = omega.size();
  MeasurementEnsemble e;
  e.blocks_.reserve(static_cast<std::size_t>(K));
  for (int b = 0; b < K; ++b) {
    RandomStream stream(derive_seed(seed, static_cast<std::uint64_t>(b)));
    Eigen::MatrixXd C(M, grid.size());
    for (int i = 0; i < M; ++i) {
      // Per row: angle, then the two anchor coordinates, in that order.
      const double theta = M_PI * stream.next_uniform();
      const double ax = stream.next_uniform() * (grid.cols - 1);
      const double ay = stream.next_uniform() * (grid.rows - 1);
      C.row(i) = line_row(grid, theta, ax, ay, decay);
    }
    e.blocks_.push_back(std::move(C));
  }
  e.sharing_ = Sharing::Independent;
  e.generator_ = GeneratorKind::Line;
  e.line_decay_ = decay;
  e.seed_ = seed;
  return e;
}

Eigen::VectorXd block_diag_apply(const MeasurementEnsemble& ensemble,
                                 const Eigen::VectorXd& v) {
  const int M = ensemble.block_rows();
  const int N = ensemble.state_dim();
  const int K = ensemble.block_count();
  if (v.size() != static_cast<Eigen::Index>(N) * K)
    throw DimensionError("stacked vector length must be N * K");

  Eigen::VectorXd out(static_cast<Eigen::Index>(M) * K);
  for (int i = 0; i < K; ++i)
    out.segment(static_cast<Eigen::Index>(i) * M, M) =
        ensemble.block(i) * v.segment(static_cast<Eigen::Index>(i) * N, N);
  return out;
}

ObservabilityOperator::ObservabilityOperator(StateModel model, SampleSet omega,
                                             MeasurementEnsemble ensemble, double scale)
    : model_(std::move(model)), omega_(std::move(omega)), ensemble_(std::move(ensemble)),
      scale_(scale) {
  if (ensemble_.block_count() != omega_.size())
    throw DimensionError("ensemble block count must equal the number of sample times");
  if (ensemble_.state_dim() != model_.dim())
    throw DimensionError("measurement width must equal the state dimension");
  if (!(scale_ > 0.0)) throw ParameterError("operator scale must be positive");
}

Eigen::VectorXd ObservabilityOperator::apply(const Eigen::VectorXd& x) const {
  if (x.size() != model_.dim())
    throw DimensionError("state dimension mismatch in observability apply");

  const int M = ensemble_.block_rows();
  Eigen::VectorXd out(static_cast<Eigen::Index>(M) * omega_.size());
  Eigen::VectorXd current = x;
  int reached = 0;
  for (int i = 0; i < omega_.size(); ++i) {
    for (; reached < omega_[i]; ++reached) current = model_.matrix() * current;
    out.segment(static_cast<Eigen::Index>(i) * M, M) = scale_ * (ensemble_.block(i) * current);
  }
  return out;
}

Eigen::MatrixXd ObservabilityOperator::materialize() const {
  const int M = ensemble_.block_rows();
  const int N = model_.dim();
  Eigen::MatrixXd Phi(static_cast<Eigen::Index>(M) * omega_.size(), N);
  for (int i = 0; i < omega_.size(); ++i) {
    // Roll the M x N block through A rather than forming the dense power.
    Eigen::MatrixXd B = scale_ * ensemble_.block(i);
    for (int step = 0; step < omega_[i]; ++step) B = B * model_.matrix();
    Phi.middleRows(static_cast<Eigen::Index>(i) * M, M) = B;
  }
  return Phi;
}

ObservabilityOperator observability(StateModel model, SampleSet omega,
                                    MeasurementEnsemble ensemble, double scale) {
  return ObservabilityOperator(std::move(model), std::move(omega), std::move(ensemble), scale);
}

// ---- serialization ----------------------------------------------------------

namespace {

constexpr char kBinaryMagic[8] = {'C', 'O', 'B', 'S', 'E', 'N', 'S', '1'};

const char* sharing_name(Sharing s) {
  return s == Sharing::Identical ? "identical" : "independent";
}

const char* generator_name(GeneratorKind g) {
  switch (g) {
    case GeneratorKind::DenseGaussian: return "dense";
    case GeneratorKind::Line: return "line";
    default: return "custom";
  }
}

Sharing sharing_from(const std::string& name) {
  if (name == "identical") return Sharing::Identical;
  if (name == "independent") return Sharing::Independent;
  throw IoError("unknown sharing mode: " + name);
}

GeneratorKind generator_from(const std::string& name) {
  if (name == "dense") return GeneratorKind::DenseGaussian;
  if (name == "line") return GeneratorKind::Line;
  if (name == "custom") return GeneratorKind::Custom;
  throw IoError("unknown generator kind: " + name);
}

}  // namespace

void save_ensemble(const MeasurementEnsemble& ensemble, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);

  const std::int32_t M = ensemble.block_rows();
  const std::int32_t N = ensemble.state_dim();
  const std::int32_t K = ensemble.block_count();
  const std::uint8_t sharing = ensemble.sharing() == Sharing::Identical ? 1 : 0;
  const std::uint8_t generator = static_cast<std::uint8_t>(ensemble.generator());
  const double decay = ensemble.line_decay();
  const std::uint64_t seed = ensemble.seed();

  out.write(kBinaryMagic, sizeof(kBinaryMagic));
  out.write(reinterpret_cast<const char*>(&M), sizeof(M));
  out.write(reinterpret_cast<const char*>(&N), sizeof(N));
  out.write(reinterpret_cast<const char*>(&K), sizeof(K));
  out.write(reinterpret_cast<const char*>(&sharing), sizeof(sharing));
  out.write(reinterpret_cast<const char*>(&generator), sizeof(generator));
  out.write(reinterpret_cast<const char*>(&decay), sizeof(decay));
  out.write(reinterpret_cast<const char*>(&seed), sizeof(seed));
  for (int b = 0; b < K; ++b) {
    const Eigen::MatrixXd& block = ensemble.block(b);
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < N; ++j) {
        const double value = block(i, j);
        out.write(reinterpret_cast<const char*>(&value), sizeof(value));
      }
    }
  }
  if (!out) throw IoError("short write: " + path);
}

MeasurementEnsemble load_ensemble(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kBinaryMagic, sizeof(magic)) != 0)
    throw IoError("not an ensemble file: " + path);

  std::int32_t M = 0, N = 0, K = 0;
  std::uint8_t sharing = 0, generator = 0;
  double decay = 0.0;
  std::uint64_t seed = 0;
  in.read(reinterpret_cast<char*>(&M), sizeof(M));
  in.read(reinterpret_cast<char*>(&N), sizeof(N));
  in.read(reinterpret_cast<char*>(&K), sizeof(K));
  in.read(reinterpret_cast<char*>(&sharing), sizeof(sharing));
  in.read(reinterpret_cast<char*>(&generator), sizeof(generator));
  in.read(reinterpret_cast<char*>(&decay), sizeof(decay));
  in.read(reinterpret_cast<char*>(&seed), sizeof(seed));
  if (!in || M < 1 || N < 1 || K < 1) throw IoError("corrupt ensemble header: " + path);

  MeasurementEnsemble e;
  e.blocks_.reserve(static_cast<std::size_t>(K));
  for (int b = 0; b < K; ++b) {
    Eigen::MatrixXd block(M, N);
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < N; ++j) {
        double value = 0.0;
        in.read(reinterpret_cast<char*>(&value), sizeof(value));
        block(i, j) = value;
      }
    }
    e.blocks_.push_back(std::move(block));
  }
  if (!in) throw IoError("truncated ensemble data: " + path);

  e.sharing_ = sharing != 0 ? Sharing::Identical : Sharing::Independent;
  e.generator_ = static_cast<GeneratorKind>(generator);
  e.line_decay_ = decay;
  e.seed_ = seed;
  return e;
}

void save_ensemble_csv(const MeasurementEnsemble& ensemble, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);

  char header[256];
  std::snprintf(header, sizeof(header),
                "# ensemble M=%d N=%d K=%d seed=%" PRIu64 " sharing=%s generator=%s decay=%.17g",
                ensemble.block_rows(), ensemble.state_dim(), ensemble.block_count(),
                ensemble.seed(), sharing_name(ensemble.sharing()),
                generator_name(ensemble.generator()), ensemble.line_decay());
  out << "# compobs-csv v1\n" << header << "\nblock,row,col,value\n";

  char line[128];
  for (int b = 0; b < ensemble.block_count(); ++b) {
    const Eigen::MatrixXd& block = ensemble.block(b);
    for (int i = 0; i < ensemble.block_rows(); ++i) {
      for (int j = 0; j < ensemble.state_dim(); ++j) {
        std::snprintf(line, sizeof(line), "%d,%d,%d,%.17g\n", b, i, j, block(i, j));
        out << line;
      }
    }
  }
  if (!out) throw IoError("short write: " + path);
}

MeasurementEnsemble load_ensemble_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);

  std::string line;
  if (!std::getline(in, line) || line != "# compobs-csv v1")
    throw IoError("missing csv version header: " + path);
  if (!std::getline(in, line)) throw IoError("missing ensemble metadata: " + path);

  int M = 0, N = 0, K = 0;
  std::uint64_t seed = 0;
  char sharing[32] = {0}, generator[32] = {0};
  double decay = 0.0;
  if (std::sscanf(line.c_str(),
                  "# ensemble M=%d N=%d K=%d seed=%" SCNu64 " sharing=%31s generator=%31s decay=%lf",
                  &M, &N, &K, &seed, sharing, generator, &decay) != 7 ||
      M < 1 || N < 1 || K < 1)
    throw IoError("corrupt ensemble metadata: " + path);
  if (!std::getline(in, line) || line != "block,row,col,value")
    throw IoError("unexpected ensemble column header: " + path);

  std::vector<Eigen::MatrixXd> blocks(static_cast<std::size_t>(K), Eigen::MatrixXd::Zero(M, N));
  long count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int b = 0, i = 0, j = 0;
    double value = 0.0;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%lf", &b, &i, &j, &value) != 4 ||
        b < 0 || b >= K || i < 0 || i >= M || j < 0 || j >= N)
      throw IoError("corrupt ensemble row: " + line);
    blocks[static_cast<std::size_t>(b)](i, j) = value;
    ++count;
  }
  if (count != static_cast<long>(K) * M * N) throw IoError("wrong ensemble entry count: " + path);

  MeasurementEnsemble e;
  e.blocks_ = std::move(blocks);
  e.sharing_ = sharing_from(sharing);
  e.generator_ = generator_from(generator);
  e.line_decay_ = decay;
  e.seed_ = seed;
  return e;
}

}  // namespace compobs
