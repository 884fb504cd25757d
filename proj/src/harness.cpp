#include "blochscat/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "blochscat/qp_solver.hpp"

namespace blochscat {

namespace fs = std::filesystem;

namespace {

constexpr int kCellNx = 64, kCellNy = 32;

Complex unit_phase(double arg) { return {std::cos(arg), std::sin(arg)}; }

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Samples stored per alpha-solve: the trace on Gamma_h and a plot subsample
// of the cell field. These are all the inverse transform needs.
struct AlphaRecord {
  Eigen::VectorXcd trace;
  Eigen::VectorXcd cell;
};

std::string cache_key(const ExperimentConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "ex=" << c.example << " k=" << c.resolved_k() << " H=" << c.H
     << " n1=" << c.n1 << " n2=" << c.n2 << " J=" << c.dtn_order
     << " samples=" << c.samples << " gh=" << c.gamma_h_height << " cell="
     << kCellNx << "x" << kCellNy;
  return os.str();
}

constexpr std::uint64_t kCacheMagic = 0x42534331ull;  // "BSC1"

bool load_record(const fs::path& file, double alpha, long nt, long nc,
                 AlphaRecord& rec) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return false;
  std::uint64_t magic = 0;
  double a = 0.0;
  std::int64_t t = 0, c = 0;
  in.read(reinterpret_cast<char*>(&magic), sizeof magic);
  in.read(reinterpret_cast<char*>(&a), sizeof a);
  in.read(reinterpret_cast<char*>(&t), sizeof t);
  in.read(reinterpret_cast<char*>(&c), sizeof c);
  if (!in || magic != kCacheMagic || a != alpha || t != nt || c != nc)
    return false;
  rec.trace.resize(nt);
  rec.cell.resize(nc);
  in.read(reinterpret_cast<char*>(rec.trace.data()), nt * sizeof(Complex));
  in.read(reinterpret_cast<char*>(rec.cell.data()), nc * sizeof(Complex));
  return bool(in);
}

void store_record(const fs::path& file, double alpha, const AlphaRecord& rec) {
  fs::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return;  // cache is best-effort
    std::int64_t t = rec.trace.size(), c = rec.cell.size();
    out.write(reinterpret_cast<const char*>(&kCacheMagic), sizeof kCacheMagic);
    out.write(reinterpret_cast<const char*>(&alpha), sizeof alpha);
    out.write(reinterpret_cast<const char*>(&t), sizeof t);
    out.write(reinterpret_cast<const char*>(&c), sizeof c);
    out.write(reinterpret_cast<const char*>(rec.trace.data()),
              t * sizeof(Complex));
    out.write(reinterpret_cast<const char*>(rec.cell.data()),
              c * sizeof(Complex));
    if (!out) return;
  }
  std::error_code ec;
  fs::rename(tmp, file, ec);
}

QpData make_qp_data(const SourceSpec& spec, const ExperimentConfig& config,
                    const StripMesh& mesh, double alpha) {
  if (spec.kind == SourceKind::PointPairBelow) {
    Eigen::VectorXcd g(mesh.num_dirichlet);
    double k = config.resolved_k();
    for (int i = 0; i < mesh.n1; ++i) {
      int v = mesh.vertex_id(i, 0);
      g[mesh.dirichlet_index[v]] =
          -bloch_dirichlet_trace(spec, k, alpha, mesh.vertices[v]);
    }
    return DirichletLift{std::move(g)};
  }
  return bloch_neumann_data(spec, config.resolved_k(), alpha, config.H);
}

}  // namespace

double ExperimentConfig::resolved_k() const {
  if (k > 0.0) return k;
  return example % 2 == 1 ? std::sqrt(2.0) : 10.0;
}

void ExperimentConfig::validate() const {
  if (example < 1 || example > 6)
    throw std::invalid_argument("config: example must be 1..6");
  if (k < 0.0) throw std::invalid_argument("config: k must be positive");
  if (!(H > 0.0)) throw std::invalid_argument("config: H must be positive");
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("config: need 0 < p < 1");
  if (N < 1 || M < 1) throw std::invalid_argument("config: need N, M >= 1");
  if ((n1 == 0 || n2 == 0) && !(eps > 0.0))
    throw std::invalid_argument("config: give eps or both n1 and n2");
  if (samples < 2) throw std::invalid_argument("config: samples >= 2 required");
  if (threads < 1) throw std::invalid_argument("config: threads >= 1 required");
  if (!(gamma_h_height > 0.0 && gamma_h_height < H))
    throw std::invalid_argument("config: Gamma_h must lie inside the strip");
}

void apply_config_line(ExperimentConfig& config, const std::string& line) {
  std::string s = line;
  if (auto pos = s.find('#'); pos != std::string::npos) s.erase(pos);
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)); };
  s.erase(std::remove_if(s.begin(), s.end(), is_space), s.end());
  if (s.empty()) return;
  auto eq = s.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("config: expected key=value, got '" + line + "'");
  std::string key = s.substr(0, eq), value = s.substr(eq + 1);
  try {
    if (key == "example") config.example = std::stoi(value);
    else if (key == "k") config.k = std::stod(value);
    else if (key == "H") config.H = std::stod(value);
    else if (key == "p") config.p = std::stod(value);
    else if (key == "N") config.N = std::stoi(value);
    else if (key == "M") config.M = std::stoi(value);
    else if (key == "eps") config.eps = std::stod(value);
    else if (key == "n1") config.n1 = std::stoi(value);
    else if (key == "n2") config.n2 = std::stoi(value);
    else if (key == "dtn_order") config.dtn_order = std::stoi(value);
    else if (key == "samples") config.samples = std::stoi(value);
    else if (key == "gamma_h_height") config.gamma_h_height = std::stod(value);
    else if (key == "threads") config.threads = std::stoi(value);
    else if (key == "out") config.out_dir = value;
    else if (key == "cache") config.cache_dir = value;
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  } catch (const std::logic_error&) {
    throw std::invalid_argument("config: bad value for '" + key + "'");
  }
}

ExperimentConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  ExperimentConfig config;
  std::string line;
  while (std::getline(in, line)) apply_config_line(config, line);
  return config;
}

void write_config(const ExperimentConfig& config, std::ostream& os) {
  os.precision(17);
  os << "example=" << config.example << "\n"
     << "k=" << config.resolved_k() << "\n"
     << "H=" << config.H << "\n"
     << "p=" << config.p << "\n"
     << "N=" << config.N << "\n"
     << "M=" << config.M << "\n"
     << "eps=" << config.eps << "\n"
     << "n1=" << config.n1 << "\n"
     << "n2=" << config.n2 << "\n"
     << "dtn_order=" << config.dtn_order << "\n"
     << "samples=" << config.samples << "\n"
     << "gamma_h_height=" << config.gamma_h_height << "\n"
     << "threads=" << config.threads << "\n"
     << "out=" << config.out_dir << "\n"
     << "cache=" << config.cache_dir << "\n";
}

FieldSamples make_sample_grid(int count, double x2) {
  FieldSamples fs;
  fs.x2 = x2;
  fs.x1.resize(count);
  for (int i = 0; i < count; ++i)
    fs.x1[i] = -M_PI + 2.0 * M_PI * i / (count - 1);
  fs.values = Eigen::VectorXcd::Zero(count);
  return fs;
}

RunResult run_example(const ExperimentConfig& input) {
  auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig config = input;
  config.validate();
  const double k = config.resolved_k();

  PeriodicSurface surface = paper_surface(config.H);
  if (config.n1 == 0 || config.n2 == 0) {
    auto [n1, n2] = choose_grid(surface, config.eps);
    config.n1 = n1;
    config.n2 = n2;
  }
  StripMesh mesh = generate_strip_mesh(surface, config.n1, config.n2);
  if (config.dtn_order == 0)
    config.dtn_order = default_dtn_order(k, config.n1);
  const SourceSpec spec = SourceSpec::example(config.example);

  WaveParameters params = make_wave_parameters(k);
  IntervalSplit split = decompose_intervals(params);
  QuadratureScheme scheme = build_quadrature(split, config.p, config.N, config.M);

  // Solve once per distinct alpha; shared interval endpoints repeat exactly.
  std::vector<double> alphas;
  std::vector<std::size_t> node_to_alpha(scheme.nodes.size());
  {
    std::map<double, std::size_t> seen;
    for (std::size_t j = 0; j < scheme.nodes.size(); ++j) {
      auto [it, fresh] =
          seen.emplace(scheme.nodes[j].alpha, std::size_t(0));
      if (fresh) {
        it->second = alphas.size();
        alphas.push_back(scheme.nodes[j].alpha);
      }
      node_to_alpha[j] = it->second;
    }
    // Re-index ascending so each worker's block is contiguous in alpha.
    std::vector<std::size_t> order(alphas.size());
    for (std::size_t r = 0; auto& [alpha, idx] : seen) {
      order[idx] = r;
      (void)alpha;
      ++r;
    }
    std::vector<double> sorted(alphas.size());
    for (std::size_t i = 0; i < alphas.size(); ++i) sorted[order[i]] = alphas[i];
    alphas = std::move(sorted);
    for (auto& idx : node_to_alpha) idx = order[idx];
  }

  FieldSamples grid = make_sample_grid(config.samples, config.gamma_h_height);

  CellField cell;
  cell.nx = kCellNx;
  cell.ny = kCellNy;
  cell.points.reserve(std::size_t(kCellNx) * kCellNy);
  for (int j = 0; j < kCellNy; ++j)
    for (int i = 0; i < kCellNx; ++i) {
      double s = -M_PI + 2.0 * M_PI * i / kCellNx;
      double t = double(j) / (kCellNy - 1);
      // Bottom height from the mesh's piecewise-linear surface so the
      // sample stays inside the triangulation.
      double u = (s + M_PI) / (2.0 * M_PI) * mesh.n1;
      int i0 = std::clamp(int(std::floor(u)), 0, mesh.n1 - 1);
      double zl = mesh.vertices[mesh.vertex_id(i0, 0)].y();
      double zr = mesh.vertices[mesh.vertex_id(i0 + 1, 0)].y();
      double z = zl + (u - i0) * (zr - zl);
      cell.points.emplace_back(s, z + t * (config.H - z));
    }
  cell.values = Eigen::VectorXcd::Zero(cell.points.size());

  fs::path cache_sub;
  if (!config.cache_dir.empty()) {
    cache_sub = fs::path(config.cache_dir) / hex64(fnv1a(cache_key(config)));
    fs::create_directories(cache_sub);
  }

  std::vector<AlphaRecord> records(alphas.size());
  std::atomic<long> factorizations{0}, cache_hits{0};

  auto worker = [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> misses;
    for (std::size_t i = begin; i < end; ++i) {
      if (!cache_sub.empty()) {
        std::uint64_t bits;
        std::memcpy(&bits, &alphas[i], sizeof bits);
        if (load_record(cache_sub / (hex64(bits) + ".bin"), alphas[i],
                        config.samples, cell.points.size(), records[i])) {
          ++cache_hits;
          continue;
        }
      }
      misses.push_back(i);
    }
    if (misses.empty()) return;
    QpWorkspace ws(mesh, k, config.dtn_order);
    QpSolveSession session(ws);
    for (std::size_t i : misses) {
      const double alpha = alphas[i];
      QpData data = make_qp_data(spec, config, mesh, alpha);
      Eigen::VectorXcd dofs;
      try {
        dofs = session.solve(alpha, data);
      } catch (const std::exception& e) {
        throw std::runtime_error("run_example: solve failed at alpha = " +
                                 std::to_string(alpha) + ": " + e.what());
      }
      NodalField field = ws.make_field(std::move(dofs), data);
      AlphaRecord& rec = records[i];
      rec.trace.resize(config.samples);
      for (int s = 0; s < config.samples; ++s)
        rec.trace[s] = interpolate(mesh, field, grid.x1[s], grid.x2);
      rec.cell.resize(cell.points.size());
      for (std::size_t s = 0; s < cell.points.size(); ++s)
        rec.cell[s] = interpolate(mesh, field, cell.points[s].x(),
                                  cell.points[s].y());
      if (!cache_sub.empty()) {
        std::uint64_t bits;
        std::memcpy(&bits, &alpha, sizeof bits);
        store_record(cache_sub / (hex64(bits) + ".bin"), alpha, rec);
      }
    }
    factorizations += session.stats().factorizations;
  };

  int nthreads = std::min<int>(config.threads, int(alphas.size()));
  if (nthreads <= 1) {
    worker(0, alphas.size());
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nthreads);
    std::size_t chunk = (alphas.size() + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&, t] {
        try {
          std::size_t b = t * chunk;
          worker(b, std::min(alphas.size(), b + chunk));
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  // Inverse Bloch transform, accumulated in node order for determinism.
  RunResult result;
  result.config = config;
  result.gamma_h = grid;
  result.cell = std::move(cell);
  for (std::size_t j = 0; j < scheme.nodes.size(); ++j) {
    const AlphaRecord& rec = records[node_to_alpha[j]];
    const double alpha = scheme.nodes[j].alpha, sigma = scheme.nodes[j].weight;
    for (int s = 0; s < config.samples; ++s)
      result.gamma_h.values[s] +=
          sigma * unit_phase(alpha * result.gamma_h.x1[s]) * rec.trace[s];
    for (std::size_t s = 0; s < result.cell.points.size(); ++s)
      result.cell.values[s] +=
          sigma * unit_phase(alpha * result.cell.points[s].x()) * rec.cell[s];
  }
  result.scheme = std::move(scheme);
  result.factorizations = factorizations;
  result.cache_hits = cache_hits;
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

FieldSamples exact_solution(const ExperimentConfig& config) {
  if (config.example > 2)
    throw std::invalid_argument(
        "exact_solution: closed form available for Examples 1-2 only");
  const double k = config.resolved_k();
  SourceSpec spec = SourceSpec::example(config.example);
  FieldSamples fs = make_sample_grid(config.samples, config.gamma_h_height);
  for (int i = 0; i < config.samples; ++i)
    fs.values[i] = -incident_field(spec, k, {fs.x1[i], fs.x2});
  return fs;
}

double relative_error(const FieldSamples& u, const FieldSamples& u_ref) {
  if (u.x1.size() != u_ref.x1.size() || u.x1 != u_ref.x1 || u.x2 != u_ref.x2)
    throw std::invalid_argument("relative_error: sample grids differ");
  const std::size_t n = u.x1.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    num += w * std::norm(u.values[i] - u_ref.values[i]);
    den += w * std::norm(u_ref.values[i]);
  }
  if (den == 0.0)
    throw std::invalid_argument("relative_error: reference field vanishes");
  return std::sqrt(num / den);
}

FitResult fit_convergence(const std::vector<double>& xs,
                          const std::vector<double>& errs, FitMode mode) {
  if (xs.size() != errs.size() || xs.size() < 3)
    throw std::invalid_argument("fit_convergence: need >= 3 matched points");
  const std::size_t n = xs.size();
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(errs[i] > 0.0) || !std::isfinite(errs[i]))
      throw std::invalid_argument("fit_convergence: errors must be positive");
    a[i] = mode == FitMode::AlgebraicInEps ? std::log(xs[i]) : xs[i];
    b[i] = std::log(errs[i]);
  }
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (a[i] - ma) * (a[i] - ma);
    sxy += (a[i] - ma) * (b[i] - mb);
  }
  if (sxx == 0.0)
    throw std::invalid_argument("fit_convergence: degenerate abscissae");
  FitResult fit;
  fit.slope = sxy / sxx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = b[i] - mb - fit.slope * (a[i] - ma);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

void emit_outputs(const ErrorReport& report, const RunResult& result,
                  const std::string& out_dir) {
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::is_directory(dir))
    throw std::runtime_error("emit_outputs: cannot create " + out_dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::trunc);
    if (!out)
      throw std::runtime_error(std::string("emit_outputs: cannot write ") +
                               (dir / name).string());
    out.precision(17);
    return out;
  };

  {
    auto out = open("errors.csv");
    out << "sweep_param,value,err,runtime_seconds\n";
    std::string param =
        report.sweep_param.empty() ? "none" : report.sweep_param;
    for (std::size_t i = 0; i < report.values.size(); ++i)
      out << param << "," << report.values[i] << "," << report.errors[i]
          << "," << report.runtimes[i] << "\n";
  }
  {
    auto out = open("quadrature_nodes.csv");
    dump_quadrature_csv(result.scheme, out);
  }
  {
    auto out = open("gamma_h_field.csv");
    out << "x1,re_u,im_u\n";
    for (std::size_t i = 0; i < result.gamma_h.x1.size(); ++i)
      out << result.gamma_h.x1[i] << "," << result.gamma_h.values[i].real()
          << "," << result.gamma_h.values[i].imag() << "\n";
  }
  {
    auto out = open("cell_field.csv");
    out << "x1,x2,re_u,im_u\n";
    for (std::size_t i = 0; i < result.cell.points.size(); ++i)
      out << result.cell.points[i].x() << "," << result.cell.points[i].y()
          << "," << result.cell.values[i].real() << ","
          << result.cell.values[i].imag() << "\n";
  }
  {
    std::ofstream out(dir / "config.txt", std::ios::trunc);
    write_config(result.config, out);
  }
}

}  // namespace blochscat
