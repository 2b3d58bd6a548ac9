#include "subheat/util.hpp"

#include <array>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <thread>

namespace subheat {

std::vector<double> log_grid(double a, double b, int n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = a;
    return out;
  }
  double la = std::log(a), lb = std::log(b);
  for (int i = 0; i < n; ++i)
    out[i] = std::exp(la + (lb - la) * i / (n - 1));
  out.front() = a;
  out.back() = b;
  return out;
}

std::vector<double> lin_grid(double a, double b, int n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = a;
    return out;
  }
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
  return out;
}

double halton(long long index, int base) {
  double f = 1.0, r = 0.0;
  long long i = index + 1;  // skip the 0 point
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

std::vector<std::array<double, 3>> fibonacci_sphere(int n) {
  std::vector<std::array<double, 3>> pts(n);
  const double ga = M_PI * (3.0 - std::sqrt(5.0));  // golden angle
  for (int i = 0; i < n; ++i) {
    double y = n == 1 ? 0.0 : 1.0 - 2.0 * i / (n - 1.0);
    double r = std::sqrt(std::max(0.0, 1.0 - y * y));
    double th = ga * i;
    pts[i] = {r * std::cos(th), y, r * std::sin(th)};
  }
  return pts;
}

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void JsonWriter::pre_value() {
  if (!has_item_.empty() && has_item_.back()) out_ += ',';
  if (!has_item_.empty()) has_item_.back() = true;
}

void JsonWriter::key_prefix(const std::string& key) {
  pre_value();
  out_ += '"';
  out_ += key;
  out_ += "\":";
}

JsonWriter& JsonWriter::begin_object() {
  pre_value();
  out_ += '{';
  has_item_.push_back(false);
  return *this;
}
JsonWriter& JsonWriter::begin_object(const std::string& key) {
  key_prefix(key);
  out_ += '{';
  has_item_.push_back(false);
  return *this;
}
JsonWriter& JsonWriter::end_object() {
  out_ += '}';
  has_item_.pop_back();
  return *this;
}
JsonWriter& JsonWriter::begin_array(const std::string& key) {
  key_prefix(key);
  out_ += '[';
  has_item_.push_back(false);
  return *this;
}
JsonWriter& JsonWriter::end_array() {
  out_ += ']';
  has_item_.pop_back();
  return *this;
}
JsonWriter& JsonWriter::field(const std::string& key, double v) {
  key_prefix(key);
  out_ += fmt17(v);
  return *this;
}
JsonWriter& JsonWriter::field(const std::string& key, long long v) {
  key_prefix(key);
  out_ += std::to_string(v);
  return *this;
}
JsonWriter& JsonWriter::field(const std::string& key, int v) {
  return field(key, static_cast<long long>(v));
}
JsonWriter& JsonWriter::field(const std::string& key, bool v) {
  key_prefix(key);
  out_ += v ? "true" : "false";
  return *this;
}
JsonWriter& JsonWriter::field(const std::string& key, const std::string& v) {
  key_prefix(key);
  out_ += '"';
  for (char c : v) {
    if (c == '"' || c == '\\') out_ += '\\';
    out_ += c;
  }
  out_ += '"';
  return *this;
}
JsonWriter& JsonWriter::field_raw(const std::string& key, const std::string& raw) {
  key_prefix(key);
  out_ += raw;
  return *this;
}
JsonWriter& JsonWriter::item(double v) {
  pre_value();
  out_ += fmt17(v);
  return *this;
}

int thread_count() {
  if (const char* env = std::getenv("SUBHEAT_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  int workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace subheat
