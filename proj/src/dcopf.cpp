#include "dualprox/dcopf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

namespace dualprox {

double PowerNetwork::total_gen_capacity() const {
  double s = 0.0;
  for (const auto& g : gens) s += g.pmax;
  return s;
}

namespace {

struct RawTable {
  std::vector<std::vector<double>> rows;
  int first_line = 0;
};

// Extracts "mpc.<name> = [ rows ];". Rows are newline- or ';'-terminated
// number lists; '%' starts a comment.
RawTable read_table(const std::string& text, const std::string& name) {
  const std::string key = "mpc." + name;
  size_t pos = 0;
  while (true) {
    pos = text.find(key, pos);
    if (pos == std::string::npos)
      throw ValidationError("case file: missing table " + key);
    const size_t after = pos + key.size();
    if (after < text.size() && (isalnum(text[after]) || text[after] == '_')) {
      pos = after;
      continue;  // e.g. mpc.gencost when looking for mpc.gen
    }
    break;
  }
  const size_t open = text.find('[', pos);
  const size_t close = text.find(']', open);
  if (open == std::string::npos || close == std::string::npos)
    throw ValidationError("case file: malformed table " + key);

  int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + open, '\n'));
  RawTable table;
  table.first_line = line;

  std::string body = text.substr(open + 1, close - open - 1);
  std::istringstream ss(body);
  std::string raw;
  while (std::getline(ss, raw)) {
    const size_t cm = raw.find('%');
    if (cm != std::string::npos) raw.resize(cm);
    // a ';' ends a row; rows may also just end with the line
    for (char& ch : raw)
      if (ch == ';' || ch == ',' || ch == '\t') ch = ' ';
    std::istringstream ls(raw);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) {
      std::string bad;
      ls.clear();
      ls >> bad;
      throw ValidationError("case file: cannot parse '" + bad + "' in " + key + " near line " +
                            std::to_string(line));
    }
    if (!row.empty()) table.rows.push_back(std::move(row));
    ++line;
  }
  return table;
}

double read_base_mva(const std::string& text) {
  const size_t pos = text.find("mpc.baseMVA");
  if (pos == std::string::npos) return 100.0;
  const size_t eq = text.find('=', pos);
  if (eq == std::string::npos) return 100.0;
  return std::strtod(text.c_str() + eq + 1, nullptr);
}

void check_connected(const PowerNetwork& net) {
  std::vector<char> seen(net.n_bus, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const int b = stack.back();
    stack.pop_back();
    for (const auto& br : net.branches) {
      const int other = br.from == b ? br.to : (br.to == b ? br.from : -1);
      if (other >= 0 && !seen[other]) {
        seen[other] = 1;
        stack.push_back(other);
      }
    }
  }
  for (int b = 0; b < net.n_bus; ++b)
    if (!seen[b])
      throw ValidationError("network is disconnected (bus index " + std::to_string(b) + ")");
}

}  // namespace

PowerNetwork parse_matpower_case(const std::string& text) {
  PowerNetwork net;
  net.base_mva = read_base_mva(text);

  const RawTable bus = read_table(text, "bus");
  const RawTable gen = read_table(text, "gen");
  const RawTable branch = read_table(text, "branch");
  const RawTable gencost = read_table(text, "gencost");

  std::map<int, int> bus_index;  // external id -> dense index
  net.n_bus = static_cast<int>(bus.rows.size());
  if (net.n_bus < 1) throw ValidationError("case file: empty bus table");
  net.base_demand.resize(net.n_bus);
  int ref_bus = -1;
  for (int i = 0; i < net.n_bus; ++i) {
    const auto& row = bus.rows[i];
    if (row.size() < 3)
      throw ValidationError("case file: short bus row near line " +
                            std::to_string(bus.first_line + i));
    const int ext = static_cast<int>(row[0]);
    if (bus_index.count(ext))
      throw ValidationError("case file: duplicate bus id " + std::to_string(ext));
    bus_index[ext] = i;
    const int type = static_cast<int>(row[1]);
    if (type == 3) ref_bus = i;
    const double pd = row[2];
    if (pd < 0.0)
      throw ValidationError("case file: negative demand at bus " + std::to_string(ext) +
                            " is not supported");
    net.base_demand[i] = pd;
  }

  if (gencost.rows.size() != gen.rows.size())
    throw ValidationError("case file: gencost rows do not match gen rows");
  for (size_t g = 0; g < gen.rows.size(); ++g) {
    const auto& row = gen.rows[g];
    if (row.size() < 10)
      throw ValidationError("case file: short gen row near line " +
                            std::to_string(gen.first_line + static_cast<int>(g)));
    const int status = static_cast<int>(row[7]);
    if (status == 0) continue;
    GeneratorData gd;
    const auto it = bus_index.find(static_cast<int>(row[0]));
    if (it == bus_index.end())
      throw ValidationError("case file: generator references unknown bus " +
                            std::to_string(static_cast<int>(row[0])));
    gd.bus = it->second;
    gd.pmax = row[8];
    gd.pmin = row[9];
    if (!(gd.pmin < gd.pmax))
      throw ValidationError("case file: generator " + std::to_string(g) +
                            " needs pmin < pmax");

    const auto& cost = gencost.rows[g];
    // polynomial model: [2 startup shutdown ncost cN ... c0]
    if (cost.size() < 4 || static_cast<int>(cost[0]) != 2)
      throw ValidationError("case file: only polynomial gencost (model 2) is supported");
    const int ncost = static_cast<int>(cost[3]);
    if (cost.size() < 4 + static_cast<size_t>(ncost))
      throw ValidationError("case file: gencost row " + std::to_string(g) + " is short");
    for (int k = 0; k < ncost - 2; ++k) {
      if (cost[4 + k] != 0.0)
        throw ValidationError(
            "case file: quadratic or higher generator cost is not supported (row " +
            std::to_string(g) + ")");
    }
    gd.cost = ncost >= 2 ? cost[4 + ncost - 2] : 0.0;
    net.gens.push_back(gd);
  }
  if (net.gens.empty()) throw ValidationError("case file: no in-service generators");

  double cap_guess = net.total_gen_capacity();
  for (size_t e = 0; e < branch.rows.size(); ++e) {
    const auto& row = branch.rows[e];
    if (row.size() < 11)
      throw ValidationError("case file: short branch row near line " +
                            std::to_string(branch.first_line + static_cast<int>(e)));
    const int status = static_cast<int>(row[10]);
    if (status == 0) continue;
    BranchData bd;
    const auto fi = bus_index.find(static_cast<int>(row[0]));
    const auto ti = bus_index.find(static_cast<int>(row[1]));
    if (fi == bus_index.end() || ti == bus_index.end())
      throw ValidationError("case file: branch references unknown bus");
    bd.from = fi->second;
    bd.to = ti->second;
    const double x = row[3];
    if (!(x > 0.0))
      throw ValidationError("case file: branch " + std::to_string(e) +
                            " needs positive reactance");
    bd.susceptance = 1.0 / x;
    double rate = row[5];
    // rateA = 0 means unlimited in this format; substitute a finite bound
    if (rate <= 0.0) rate = 2.0 * std::max(cap_guess, 1.0);
    bd.fmax = rate;
    bd.fmin = -rate;
    net.branches.push_back(bd);
  }
  if (net.branches.empty() && net.n_bus > 1)
    throw ValidationError("case file: no in-service branches");

  if (ref_bus >= 0) {
    net.slack_bus = ref_bus;
  } else {
    // no reference flag: take the bus with the largest generation capacity
    Vec cap(net.n_bus, 0.0);
    for (const auto& g : net.gens) cap[g.bus] += g.pmax;
    net.slack_bus =
        static_cast<int>(std::max_element(cap.begin(), cap.end()) - cap.begin());
  }

  check_connected(net);

  double total_demand = 0.0;
  for (double d : net.base_demand) total_demand += d;
  if (!(net.total_gen_capacity() > total_demand))
    throw ValidationError("case file: generation capacity does not cover base demand");

  return net;
}

PtdfMatrix compute_ptdf(const PowerNetwork& net) {
  const int nb = net.n_bus;
  const int ne = static_cast<int>(net.branches.size());
  PtdfMatrix out;
  out.slack = net.slack_bus;
  out.values = Matrix(ne, nb);
  if (nb == 1) return out;  // single bus: no flows to map

  // nodal susceptance matrix with the slack row/column deleted
  const int nr = nb - 1;
  const auto red = [&](int b) { return b < net.slack_bus ? b : b - 1; };
  Matrix B(nr, nr);
  for (const auto& br : net.branches) {
    const double s = br.susceptance;
    if (br.from != net.slack_bus) B(red(br.from), red(br.from)) += s;
    if (br.to != net.slack_bus) B(red(br.to), red(br.to)) += s;
    if (br.from != net.slack_bus && br.to != net.slack_bus) {
      B(red(br.from), red(br.to)) -= s;
      B(red(br.to), red(br.from)) -= s;
    }
  }
  if (!cholesky(B))
    throw ValidationError("reduced susceptance matrix is singular (disconnected network?)");

  // PTDF row e = Bf_e * Binv restricted to non-slack buses
  Vec rhs(nr), sol(nr);
#pragma omp parallel for schedule(static) firstprivate(rhs, sol) if (ne > 1)
  for (int e = 0; e < ne; ++e) {
    const auto& br = net.branches[e];
    std::fill(rhs.begin(), rhs.end(), 0.0);
    if (br.from != net.slack_bus) rhs[red(br.from)] += br.susceptance;
    if (br.to != net.slack_bus) rhs[red(br.to)] -= br.susceptance;
    cholesky_solve(B, rhs.data(), sol.data());
    for (int b = 0; b < nb; ++b)
      out.values(e, b) = b == net.slack_bus ? 0.0 : sol[red(b)];
  }
  return out;
}

DemandSample sample_demand(const PowerNetwork& net, std::uint64_t seed,
                           std::pair<double, double> global_range, double local_noise) {
  if (!(global_range.first <= global_range.second) || local_noise < 0.0 || local_noise >= 1.0)
    throw ValidationError("bad demand sampling parameters");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> alpha_dist(global_range.first, global_range.second);
  std::uniform_real_distribution<double> eta_dist(1.0 - local_noise, 1.0 + local_noise);

  const int nb = net.n_bus;
  Vec eta(nb);
  for (int b = 0; b < nb; ++b) eta[b] = eta_dist(rng);

  const double cap = 0.95 * net.total_gen_capacity();
  DemandSample s;
  s.seed = seed;
  s.beta.resize(nb);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double alpha = alpha_dist(rng);
    double total = 0.0;
    for (int b = 0; b < nb; ++b) {
      s.beta[b] = net.base_demand[b] * alpha * eta[b];
      total += s.beta[b];
    }
    if (total <= cap) return s;
  }
  throw ValidationError("could not sample a demand within generation capacity in 100 tries");
}

Vec rhs_for_demand(const PowerNetwork& net, const PtdfMatrix& ptdf, const Vec& beta) {
  const int ne = static_cast<int>(net.branches.size());
  if (static_cast<int>(beta.size()) != net.n_bus)
    throw ValidationError("demand vector has wrong length");
  Vec b(1 + ne, 0.0);
  double total = 0.0;
  for (double d : beta) total += d;
  b[0] = total;
  for (int e = 0; e < ne; ++e) b[1 + e] = -dot(ptdf.values.row(e), beta.data(), net.n_bus);
  return b;
}

ParametricLpInstance to_standard_form(const PowerNetwork& net, const PtdfMatrix& ptdf,
                                      const DemandSample& sample, VariableMap* map) {
  const int ng = static_cast<int>(net.gens.size());
  const int ne = static_cast<int>(net.branches.size());
  const int n = ng + ne;
  const int m = 1 + ne;

  Matrix A(m, n);
  Vec c(n, 0.0), l(n), u(n);

  // x = [generation ; flows]
  for (int g = 0; g < ng; ++g) {
    A(0, g) = 1.0;
    c[g] = net.gens[g].cost;
    l[g] = net.gens[g].pmin;
    u[g] = net.gens[g].pmax;
  }
  for (int e = 0; e < ne; ++e) {
    // p^f_e - sum_g PTDF[e, bus(g)] p^g_g = -(PTDF beta)_e
    for (int g = 0; g < ng; ++g) A(1 + e, g) = -ptdf.values(e, net.gens[g].bus);
    A(1 + e, ng + e) = 1.0;
    l[ng + e] = net.branches[e].fmin;
    u[ng + e] = net.branches[e].fmax;
  }

  if (map) {
    map->entries.clear();
    for (int g = 0; g < ng; ++g) map->entries.emplace_back(VarKind::Generator, g);
    for (int e = 0; e < ne; ++e) map->entries.emplace_back(VarKind::Flow, e);
  }

  return ParametricLpInstance(std::move(A), rhs_for_demand(net, ptdf, sample.beta), std::move(c),
                              std::move(l), std::move(u));
}

}  // namespace dualprox
