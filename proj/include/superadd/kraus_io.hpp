#pragma once

// Plain-text Kraus files and channel spec strings.
//
// Kraus file layout:
//   dimOut dimIn count
//   count blocks of dimOut rows; each row holds dimIn entries "re,im"
// separated by whitespace. Blank lines and lines starting with '#' are ignored.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "superadd/weyl_channels.hpp"

namespace superadd {

namespace detail {

inline double parse_double(std::string_view text, const std::string& what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw invalid_input(what + ": cannot parse number '" + std::string(text) + "'");
  }
  return v;
}

inline int parse_positive_int(const std::string& token, const std::string& what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || v < 1) {
    throw invalid_input(what + ": expected a positive integer, got '" + token + "'");
  }
  return v;
}

}  // namespace detail

inline QuantumChannel parse_kraus(std::istream& in, const std::string& source = "kraus") {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  if (tokens.size() < 3) throw invalid_input(source + ": missing header 'dimOut dimIn count'");
  const int dim_out = detail::parse_positive_int(tokens[0], source + " header dimOut");
  const int dim_in = detail::parse_positive_int(tokens[1], source + " header dimIn");
  const int count = detail::parse_positive_int(tokens[2], source + " header count");
  const std::size_t expected = 3 + static_cast<std::size_t>(dim_out) * dim_in * count;
  if (tokens.size() != expected) {
    throw invalid_input(source + ": expected " + std::to_string(expected - 3) + " entries, found " +
                        std::to_string(tokens.size() - 3));
  }
  std::vector<ComplexMatrix> ks;
  std::size_t t = 3;
  for (int c = 0; c < count; ++c) {
    ComplexMatrix k(dim_out, dim_in);
    for (int i = 0; i < dim_out; ++i) {
      for (int j = 0; j < dim_in; ++j, ++t) {
        const std::string& tok = tokens[t];
        const auto comma = tok.find(',');
        if (comma == std::string::npos) {
          throw invalid_input(source + ": entry '" + tok + "' is not of the form re,im");
        }
        const std::string_view sv(tok);
        k(i, j) = complex(detail::parse_double(sv.substr(0, comma), source),
                          detail::parse_double(sv.substr(comma + 1), source));
      }
    }
    ks.push_back(std::move(k));
  }
  QuantumChannel ch(std::move(ks));
  if (ch.dim_in() * ch.dim_out() <= 4096 && choi(ch).min_eigenvalue() < -tol::kPositivity) {
    throw invalid_input(source + ": Choi matrix is not positive semidefinite");
  }
  return ch;
}

inline QuantumChannel read_kraus_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open Kraus file '" + path.string() + "'");
  return parse_kraus(in, path.string());
}

inline void write_kraus(std::ostream& out, const QuantumChannel& ch) {
  out << ch.dim_out() << ' ' << ch.dim_in() << ' ' << ch.kraus().size() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& k : ch.kraus()) {
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      for (Eigen::Index j = 0; j < k.cols(); ++j) {
        out << (j ? " " : "") << k(i, j).real() << ',' << k(i, j).imag();
      }
      out << '\n';
    }
    out << '\n';
  }
}

/// Channel spec grammar: dep:<q> | qc:<q> | id | kraus:<path>, plus
/// phase:<lambda>, weyl:<r>,<p> and ce (conditional expectation).
/// `dim` is the input dimension for the built-in families.
inline QuantumChannel parse_channel_spec(std::string_view spec, int dim) {
  const auto colon = spec.find(':');
  const std::string_view head = spec.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  const std::string where = "channel spec '" + std::string(spec) + "'";
  auto need_arg = [&] {
    if (arg.empty()) throw invalid_input(where + ": missing parameter");
  };
  auto no_arg = [&] {
    if (colon != std::string_view::npos) throw invalid_input(where + ": takes no parameter");
  };
  if (head == "id") {
    no_arg();
    return identity_channel(dim);
  }
  if (head == "ce") {
    no_arg();
    return conditional_expectation(dim);
  }
  if (head == "dep") {
    need_arg();
    return depolarizing(dim, detail::parse_double(arg, where));
  }
  if (head == "qc") {
    need_arg();
    return qc_channel(dim, detail::parse_double(arg, where));
  }
  if (head == "phase") {
    need_arg();
    return phase_damping(dim, detail::parse_double(arg, where));
  }
  if (head == "weyl") {
    need_arg();
    const auto comma = arg.find(',');
    if (comma == std::string_view::npos) throw invalid_input(where + ": expected weyl:<r>,<p>");
    return weyl_channel({dim, detail::parse_double(arg.substr(0, comma), where),
                         detail::parse_double(arg.substr(comma + 1), where)});
  }
  if (head == "kraus") {
    need_arg();
    return read_kraus_file(std::filesystem::path(std::string(arg)));
  }
  throw invalid_input(where + ": unknown channel kind '" + std::string(head) + "'");
}

}  // namespace superadd
