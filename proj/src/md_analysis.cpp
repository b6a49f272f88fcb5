#include "tub/errors.hpp"
#include "tub/md.hpp"
#include "tub/report.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <mutex>

namespace tub {

namespace {

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<double> fft_autocorr_sum(const std::vector<std::vector<double>>& series, std::size_t max_lag) {
    const std::size_t M = series.front().size();
    std::size_t n = 1;
    while (n < 2 * M) n <<= 1;
    double* in = fftw_alloc_real(n);
    fftw_complex* spec = fftw_alloc_complex(n / 2 + 1);
    fftw_plan fwd, bwd;
    {
        std::lock_guard<std::mutex> lk(fftw_planner_mutex());
        fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, spec, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, in, FFTW_ESTIMATE);
    }
    std::vector<double> acc(max_lag + 1, 0.0);
    for (const auto& s : series) {
        std::fill(in, in + n, 0.0);
        std::copy(s.begin(), s.end(), in);
        fftw_execute(fwd);
        for (std::size_t k = 0; k < n / 2 + 1; ++k) {
            const double re = spec[k][0], im = spec[k][1];
            spec[k][0] = re * re + im * im;
            spec[k][1] = 0.0;
        }
        fftw_execute(bwd);
        for (std::size_t k = 0; k <= max_lag; ++k) acc[k] += in[k] / static_cast<double>(n);
    }
    {
        std::lock_guard<std::mutex> lk(fftw_planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }
    fftw_free(in);
    fftw_free(spec);
    return acc;
}

} // namespace

std::vector<double> multi_autocorrelation(const std::vector<std::vector<double>>& series, std::size_t max_lag,
                                          CorrRoute route) {
    if (series.empty()) return std::vector<double>(max_lag + 1, 0.0);
    const std::size_t M = series.front().size();
    for (const auto& s : series)
        if (s.size() != M) throw ShapeError("multi_autocorrelation: unequal series lengths");
    if (max_lag >= M) throw ResolutionError("multi_autocorrelation: max_lag must be below the series length");
    std::vector<double> acc;
    if (route == CorrRoute::fft) {
        acc = fft_autocorr_sum(series, max_lag);
    } else {
        acc.assign(max_lag + 1, 0.0);
        for (const auto& s : series)
            for (std::size_t k = 0; k <= max_lag; ++k) {
                double sum = 0.0;
                for (std::size_t t = 0; t + k < M; ++t) sum += s[t] * s[t + k];
                acc[k] += sum;
            }
    }
    for (std::size_t k = 0; k <= max_lag; ++k) acc[k] /= static_cast<double>(series.size()) * (M - k);
    return acc;
}

std::vector<double> cross_correlation(const std::vector<double>& a, const std::vector<double>& b, std::size_t max_lag) {
    if (a.size() != b.size()) throw ShapeError("cross_correlation: length mismatch");
    const std::size_t M = a.size();
    if (max_lag >= M) throw ResolutionError("cross_correlation: max_lag too large");
    std::vector<double> out(max_lag + 1, 0.0);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        double s = 0.0;
        for (std::size_t t = 0; t + k < M; ++t) s += a[t + k] * b[t];
        out[k] = s / static_cast<double>(M - k);
    }
    return out;
}

AutocorrelationSeries velocity_autocorrelation(const MDTrajectory& tr, std::size_t max_lag, CorrRoute route) {
    const std::size_t M = tr.frames();
    if (M < 10000) throw ResolutionError("velocity_autocorrelation: needs at least 1e4 samples, got " + std::to_string(M));
    if (tr.vel.size() != M * tr.N * tr.dim) throw ShapeError("velocity_autocorrelation: velocities not recorded");
    std::vector<std::vector<double>> series;
    series.reserve(static_cast<std::size_t>(tr.N) * tr.dim);
    for (int i = 0; i < tr.N; ++i)
        for (int l = 0; l < tr.dim; ++l) {
            std::vector<double> s(M);
            for (std::size_t f = 0; f < M; ++f) s[f] = tr.v(f, i, l);
            series.push_back(std::move(s));
        }
    AutocorrelationSeries out;
    out.values = multi_autocorrelation(series, max_lag, route);
    out.times.resize(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) out.times[k] = k * tr.dt_sample;
    out.locate_first_zero();
    return out;
}

GreenKuboResult green_kubo(const AutocorrelationSeries& s, GKUpper upper) {
    if (s.times.size() != s.values.size() || s.times.empty()) throw ShapeError("green_kubo: malformed series");
    GreenKuboResult r;
    double t_end = s.times.back();
    if (upper == GKUpper::first_zero) {
        if (s.first_zero) {
            t_end = *s.first_zero;
            r.used_first_zero = true;
        } else {
            r.fallback = true;
        }
    }
    r.upper = t_end;
    r.value = trapezoid(s.times, s.values, t_end);
    return r;
}

namespace {

// Block jackknife for a function of several per-frame means.
Estimate jackknife(const std::vector<const std::vector<double>*>& cols,
                   const std::function<double(const std::vector<double>&)>& fn, int blocks) {
    const std::size_t M = cols.front()->size();
    const std::size_t K = cols.size();
    blocks = static_cast<int>(std::min<std::size_t>(blocks, M));
    std::vector<double> total(K, 0.0);
    std::vector<std::vector<double>> bsum(blocks, std::vector<double>(K, 0.0));
    std::vector<std::size_t> bcount(blocks, 0);
    for (std::size_t f = 0; f < M; ++f) {
        const int b = static_cast<int>(f * blocks / M);
        ++bcount[b];
        for (std::size_t k = 0; k < K; ++k) {
            bsum[b][k] += (*cols[k])[f];
            total[k] += (*cols[k])[f];
        }
    }
    std::vector<double> mean(K);
    for (std::size_t k = 0; k < K; ++k) mean[k] = total[k] / M;
    Estimate e;
    e.mean = fn(mean);
    if (blocks < 2) return e;
    std::vector<double> loo(blocks);
    double avg = 0.0;
    for (int b = 0; b < blocks; ++b) {
        std::vector<double> m(K);
        for (std::size_t k = 0; k < K; ++k) m[k] = (total[k] - bsum[b][k]) / static_cast<double>(M - bcount[b]);
        loo[b] = fn(m);
        avg += loo[b];
    }
    avg /= blocks;
    double var = 0.0;
    for (double x : loo) var += (x - avg) * (x - avg);
    e.err = std::sqrt(var * (blocks - 1) / blocks);
    return e;
}

} // namespace

Estimate jackknife_mean(const std::vector<double>& per_frame, int blocks) {
    if (per_frame.empty()) throw ShapeError("jackknife_mean: empty input");
    return jackknife({&per_frame}, [](const std::vector<double>& m) { return m[0]; }, blocks);
}

MDStatistics local_statistics(const MDTrajectory& tr, double T_target) {
    const std::size_t M = tr.frames();
    const int N = tr.N, d = tr.dim;
    if (M < 4) throw ResolutionError("local_statistics: too few frames");
    if (tr.vel.size() != M * N * d || tr.force.size() != M * N * d || tr.local.size() != M * N)
        throw ShapeError("local_statistics: trajectory lacks velocities, forces or local potentials");
    std::vector<double> v2(M), v4(M), f2(M), Vm(M), V2(M);
    double vmean_acc = 0.0;
    for (std::size_t fr = 0; fr < M; ++fr) {
        double s2 = 0.0, s4 = 0.0, sf = 0.0, sV = 0.0, sV2 = 0.0;
        for (int i = 0; i < N; ++i) {
            for (int l = 0; l < d; ++l) {
                const double v = tr.v(fr, i, l);
                s2 += v * v;
                s4 += v * v * v * v;
                vmean_acc += v;
                const double f = tr.fo(fr, i, l);
                sf += f * f;
            }
            const double V = tr.V(fr, i);
            sV += V;
            sV2 += V * V;
        }
        v2[fr] = s2 / (N * d);
        v4[fr] = s4 / (N * d);
        f2[fr] = sf / (N * d);
        Vm[fr] = sV / N;
        V2[fr] = sV2 / N;
    }
    MDStatistics st;
    st.N = N;
    st.dim = d;
    st.mass = tr.mass;
    st.volume = tr.volume;
    st.T_target = T_target;
    st.v2 = jackknife_mean(v2);
    st.v4 = jackknife_mean(v4);
    st.v4_ratio = jackknife({&v4, &v2}, [](const std::vector<double>& m) { return m[0] / (m[1] * m[1]); }, 20);
    st.f2 = jackknife_mean(f2);
    st.a2 = {st.f2.mean / (tr.mass * tr.mass), st.f2.err / (tr.mass * tr.mass)};
    st.V_mean = jackknife_mean(Vm);
    st.V2 = jackknife_mean(V2);
    st.var_V = jackknife({&V2, &Vm}, [](const std::vector<double>& m) { return m[0] - m[1] * m[1]; }, 20);
    for (std::size_t k = 0; k < tr.local.size(); ++k) {
        st.max_abs_V = std::max(st.max_abs_V, std::abs(tr.local[k]));
        st.max_abs_V_centered = std::max(st.max_abs_V_centered, std::abs(tr.local[k] - st.V_mean.mean));
    }
    st.pressure = jackknife_mean(tr.pressure);
    auto variance = [](const std::vector<double>& x) {
        double m = 0.0, s = 0.0;
        for (double v : x) m += v;
        m /= x.size();
        for (double v : x) s += (v - m) * (v - m);
        return s / x.size();
    };
    st.var_pressure = variance(tr.pressure);
    std::vector<double> etot(M);
    for (std::size_t fr = 0; fr < M; ++fr) etot[fr] = tr.kinetic[fr] + tr.potential[fr];
    st.var_energy = variance(etot);
    for (double z : tr.nbr_mean) st.z_mean += z;
    st.z_mean /= M;
    if (!tr.local_h.empty()) st.var_local_h = variance(tr.local_h);
    const double vm = vmean_acc / (static_cast<double>(M) * N * d);
    st.var_v = st.v2.mean - vm * vm;
    double a = 0.0, b = 0.0;
    for (std::size_t fr = 0; fr < M / 2; ++fr) a += v2[fr];
    for (std::size_t fr = M / 2; fr < M; ++fr) b += v2[fr];
    a /= (M / 2);
    b /= (M - M / 2);
    st.half_drift = std::abs(a - b) / std::max(st.v2.mean, 1e-300);
    if (st.half_drift > 0.05) throw EquilibrationError("local_statistics: <v^2> drifts by more than 5% between halves");
    return st;
}

ForceRateStats force_rate_statistics(const MDTrajectory& tr) {
    const std::size_t M = tr.frames();
    if (M < 16) throw ResolutionError("force_rate_statistics: force series too short");
    const int N = tr.N, d = tr.dim;
    ForceRateStats out;
    out.dt = tr.dt_sample;
    double num = 0.0, den = 0.0, lit = 0.0;
    std::size_t count = 0;
    for (int i = 0; i < N; ++i)
        for (int l = 0; l < d; ++l) {
            double am = 0.0, a2 = 0.0, dm = 0.0, d2 = 0.0;
            for (std::size_t f = 0; f < M; ++f) {
                const double a = tr.fo(f, i, l) / tr.mass;
                am += a;
                a2 += a * a;
            }
            am /= M;
            a2 /= M;
            const std::size_t K = M - 2;
            for (std::size_t f = 1; f + 1 < M; ++f) {
                const double da = (tr.fo(f + 1, i, l) - tr.fo(f - 1, i, l)) / (2.0 * tr.dt_sample * tr.mass);
                dm += da;
                d2 += da * da;
            }
            dm /= K;
            d2 /= K;
            const double var = a2 - am * am;
            num += d2;
            den += var;
            if (var > 0.0) {
                lit += dm * dm / var;
                ++count;
            }
        }
    out.squared_ratio = den > 0.0 ? num / den : 0.0;
    out.literal_ratio = count ? lit / count : 0.0;
    out.samples = M;
    return out;
}

void write_checkpoint(const std::string& prefix, const MDSystem& sys, const MDState& st, std::uint64_t seed) {
    static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
    std::ofstream bin(prefix + ".bin", std::ios::binary);
    if (!bin) throw IoError("cannot write " + prefix + ".bin");
    auto put = [&](const std::vector<double>& a) {
        for (double x : a) {
            std::uint64_t u;
            std::memcpy(&u, &x, 8);
            if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
            bin.write(reinterpret_cast<const char*>(&u), 8);
        }
    };
    put(st.x);
    put(st.v);
    put(st.xu);
    if (!bin) throw IoError("short write on " + prefix + ".bin");
    json h;
    h["N"] = sys.N;
    h["dim"] = sys.dim;
    h["dt"] = sys.dt;
    h["box"] = sys.box;
    h["mass"] = sys.mass;
    h["potential"] = to_string(sys.potential);
    h["units"] = "reduced_lj";
    h["seed"] = seed;
    h["step"] = st.step;
    h["layout"] = "x, v, xu; each N*dim little-endian float64";
    std::ofstream js(prefix + ".json");
    if (!js) throw IoError("cannot write " + prefix + ".json");
    js << h.dump(2) << '\n';
}

MDState read_checkpoint(const std::string& prefix, MDSystem* sys_out) {
    std::ifstream js(prefix + ".json");
    if (!js) throw IoError("cannot read " + prefix + ".json");
    json h = json::parse(js);
    const int N = h.at("N").get<int>(), d = h.at("dim").get<int>();
    const std::size_t n = static_cast<std::size_t>(N) * d;
    std::ifstream bin(prefix + ".bin", std::ios::binary);
    if (!bin) throw IoError("cannot read " + prefix + ".bin");
    auto get = [&](std::vector<double>& a) {
        a.resize(n);
        for (auto& x : a) {
            std::uint64_t u;
            bin.read(reinterpret_cast<char*>(&u), 8);
            if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
            std::memcpy(&x, &u, 8);
        }
    };
    MDState st;
    get(st.x);
    get(st.v);
    get(st.xu);
    if (!bin) throw IoError("truncated checkpoint " + prefix + ".bin");
    st.step = h.at("step").get<long>();
    if (sys_out) {
        sys_out->N = N;
        sys_out->dim = d;
        sys_out->dt = h.at("dt").get<double>();
        sys_out->box = h.at("box").get<double>();
        sys_out->mass = h.at("mass").get<double>();
    }
    return st;
}

void write_statistics_csv(const std::string& path, const MDStatistics& s) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    auto num = [](double x) { return json(x).dump(); };
    os << "quantity,mean,err\n";
    auto row = [&](const char* k, const Estimate& e) { os << k << ',' << num(e.mean) << ',' << num(e.err) << '\n'; };
    row("v2", s.v2);
    row("v4", s.v4);
    row("v4_ratio", s.v4_ratio);
    row("f2", s.f2);
    row("a2", s.a2);
    row("V_mean", s.V_mean);
    row("V2", s.V2);
    row("var_V", s.var_V);
    row("pressure", s.pressure);
    os << "var_pressure," << num(s.var_pressure) << ",0\n";
    os << "var_energy," << num(s.var_energy) << ",0\n";
    os << "z_mean," << num(s.z_mean) << ",0\n";
    os << "var_local_h," << num(s.var_local_h) << ",0\n";
    if (!os) throw IoError("write failed on " + path);
}

} // namespace tub
