#include "duelbandits/preference.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "duelbandits/errors.hpp"

namespace duelbandits {

namespace {

std::string describe(Arm i, Arm j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

PreferenceMatrix PreferenceMatrix::from_flat(std::size_t k, std::vector<double> p) {
  if (k < 2) throw DimensionError("preference matrix needs at least 2 arms, got " + std::to_string(k));
  if (p.size() != k * k) {
    throw DimensionError("expected " + std::to_string(k * k) + " entries, got " + std::to_string(p.size()));
  }
  for (Arm i = 0; i < k; ++i) {
    for (Arm j = 0; j < k; ++j) {
      const double v = p[i * k + j];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw RangeError("entry " + describe(i, j) + " = " + std::to_string(v) + " outside [0,1]");
      }
    }
  }
  for (Arm i = 0; i < k; ++i) {
    p[i * k + i] = 0.5;
    for (Arm j = i + 1; j < k; ++j) {
      const double sum = p[i * k + j] + p[j * k + i];
      if (std::abs(sum - 1.0) > kStructureTolerance) {
        throw ComplementViolation("P" + describe(i, j) + " + P" + describe(j, i) + " = " + std::to_string(sum));
      }
    }
  }
  return PreferenceMatrix(k, std::move(p));
}

PreferenceMatrix PreferenceMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t k = rows.size();
  std::vector<double> flat;
  flat.reserve(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    if (rows[i].size() != k) {
      throw DimensionError("row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                           " entries, expected " + std::to_string(k));
    }
    flat.insert(flat.end(), rows[i].begin(), rows[i].end());
  }
  return from_flat(k, std::move(flat));
}

PreferenceMatrix btl_from_weights(std::span<const double> w) {
  const std::size_t k = w.size();
  std::vector<double> p(k * k, 0.5);
  for (Arm i = 0; i < k; ++i) {
    if (!(w[i] > 0.0)) throw RangeError("BTL weights must be positive");
    for (Arm j = 0; j < k; ++j) {
      if (i != j) p[i * k + j] = w[i] / (w[i] + w[j]);
    }
  }
  return PreferenceMatrix::from_flat(k, std::move(p));
}

PreferenceMatrix generate_btl(std::size_t k, Rng& rng) {
  if (k < 2) throw DimensionError("generate_btl needs k >= 2");
  std::vector<double> w(k);
  for (auto& x : w) x = 1.0 - rng.uniform();  // (0, 1]
  return btl_from_weights(w);
}

PreferenceMatrix generate_condorcet_hard(std::size_t k, double delta, Arm winner) {
  if (!(delta > 0.0 && delta < 0.5)) throw RangeError("SYN-CD delta must lie in (0, 0.5)");
  if (k < 2) throw DimensionError("generate_condorcet_hard needs k >= 2");
  if (winner >= k) throw RangeError("winner index " + std::to_string(winner) + " out of range");
  std::vector<double> p(k * k, 0.5);
  for (Arm j = 0; j < k; ++j) {
    if (j == winner) continue;
    p[winner * k + j] = 0.5 + delta;
    p[j * k + winner] = 0.5 - delta;
  }
  return PreferenceMatrix::from_flat(k, std::move(p));
}

PreferenceMatrix parse_matrix_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = sv.find(',', start);
      std::string_view cell = trim(sv.substr(start, comma == std::string_view::npos ? sv.npos : comma - start));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ParseError("line " + std::to_string(line_no) + ": non-numeric cell '" + std::string(cell) + "'");
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("line " + std::to_string(line_no) + ": ragged row with " + std::to_string(row.size()) +
                       " cells, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty matrix file");
  if (rows.size() != rows.front().size()) {
    throw ParseError("matrix has " + std::to_string(rows.size()) + " rows but " +
                     std::to_string(rows.front().size()) + " columns");
  }
  return PreferenceMatrix::from_rows(rows);
}

PreferenceMatrix load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_matrix_csv(buf.str());
}

std::string format_matrix_csv(const PreferenceMatrix& m) {
  std::string out;
  char cell[40];
  for (Arm i = 0; i < m.size(); ++i) {
    for (Arm j = 0; j < m.size(); ++j) {
      std::snprintf(cell, sizeof cell, "%.17g", m(i, j));
      if (j) out += ',';
      out += cell;
    }
    out += '\n';
  }
  return out;
}

void write_matrix_csv(const PreferenceMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_matrix_csv(m);
  if (!out) throw IoError("write failed for " + path.string());
}

std::optional<Arm> find_condorcet_winner(const PreferenceMatrix& m) {
  for (Arm i = 0; i < m.size(); ++i) {
    bool beats_all = true;
    for (Arm j = 0; j < m.size() && beats_all; ++j) {
      if (j != i && m(i, j) < 0.5) beats_all = false;
    }
    if (beats_all) return i;
  }
  return std::nullopt;
}

GapVector gaps(const PreferenceMatrix& m) {
  const auto winner = find_condorcet_winner(m);
  if (!winner) throw NoCondorcetWinner("matrix has no Condorcet winner");
  GapVector g;
  g.winner = *winner;
  g.eps.resize(m.size());
  for (Arm j = 0; j < m.size(); ++j) {
    g.eps[j] = j == g.winner ? 0.0 : m(g.winner, j) - 0.5;
    if (g.eps[j] > 0.0 && (!g.eps_min || g.eps[j] < *g.eps_min)) g.eps_min = g.eps[j];
  }
  return g;
}

StructureReport check_structure(const PreferenceMatrix& m) {
  const std::size_t k = m.size();
  StructureReport rep;
  std::vector<double> score(k);
  for (Arm i = 0; i < k; ++i) {
    const auto r = m.row(i);
    score[i] = std::accumulate(r.begin(), r.end(), 0.0);
  }
  rep.order.resize(k);
  std::iota(rep.order.begin(), rep.order.end(), Arm{0});
  std::stable_sort(rep.order.begin(), rep.order.end(), [&](Arm a, Arm b) { return score[a] > score[b]; });

  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      const Arm hi = rep.order[a], lo = rep.order[b];
      if (m(lo, hi) > 0.5 + kStructureTolerance) {
        rep.diagnostic = "NoTotalOrder: arm " + std::to_string(lo) + " beats higher-ranked arm " + std::to_string(hi);
        return rep;
      }
    }
  }
  rep.total_order = true;
  rep.sst = true;
  rep.sti = true;

  auto eps = [&](std::size_t a, std::size_t b) { return m(rep.order[a], rep.order[b]) - 0.5; };
  for (std::size_t a = 0; a < k && (rep.sst || rep.sti); ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      for (std::size_t c = b + 1; c < k; ++c) {
        const double ac = eps(a, c), ab = eps(a, b), bc = eps(b, c);
        if (rep.sst && ac < std::max(ab, bc) - kStructureTolerance) {
          rep.sst = false;
          rep.diagnostic += "SST violated at (" + std::to_string(rep.order[a]) + "," + std::to_string(rep.order[b]) +
                            "," + std::to_string(rep.order[c]) + "); ";
        }
        if (rep.sti && ac > ab + bc + kStructureTolerance) {
          rep.sti = false;
          rep.diagnostic += "STI violated at (" + std::to_string(rep.order[a]) + "," + std::to_string(rep.order[b]) +
                            "," + std::to_string(rep.order[c]) + "); ";
        }
      }
    }
  }
  return rep;
}

bool check_sst(const PreferenceMatrix& m) { return check_structure(m).sst; }
bool check_sti(const PreferenceMatrix& m) { return check_structure(m).sti; }

}  // namespace duelbandits
