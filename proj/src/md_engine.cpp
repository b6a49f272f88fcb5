#include "tub/md.hpp"
#include "tub/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tub {

std::string to_string(PotentialKind k) {
    switch (k) {
    case PotentialKind::none: return "none";
    case PotentialKind::lennard_jones: return "lennard_jones";
    case PotentialKind::harmonic_lattice: return "harmonic_lattice";
    case PotentialKind::trap: return "trap";
    }
    return "?";
}

void MDSystem::validate() const {
    if (N < 1) throw ConfigError("MDSystem: N must be positive");
    if (dim < 1 || dim > 3) throw ConfigError("MDSystem: dim must be 1, 2 or 3");
    if (!(box > 0.0) || !(mass > 0.0)) throw ConfigError("MDSystem: box and mass must be positive");
    if (!(dt > 0.0) || dt > 0.005 + 1e-15) throw ConfigError("MDSystem: dt must lie in (0, 0.005]");
    if (potential == PotentialKind::lennard_jones) {
        if (!(lj.cutoff > 0.0) || lj.cutoff > box / 2.0)
            throw ConfigError("MDSystem: LJ cutoff must not exceed box/2");
        if (!(lj.epsilon > 0.0) || !(lj.sigma > 0.0)) throw ConfigError("MDSystem: LJ epsilon, sigma must be positive");
    }
    if (potential == PotentialKind::harmonic_lattice || potential == PotentialKind::trap) {
        if (!(harmonic.k > 0.0)) throw ConfigError("MDSystem: spring constant must be positive");
    }
    if (thermostat) {
        if (!thermostat->seed) throw ConfigError("MDSystem: Langevin thermostat requires a seed");
        if (!(thermostat->gamma >= 0.0) || !(thermostat->T >= 0.0))
            throw ConfigError("MDSystem: thermostat gamma and T must be non-negative");
    }
}

double MDSystem::volume() const { return std::pow(box, dim); }

namespace {

int side_count(int N, int dim) {
    int n = static_cast<int>(std::ceil(std::pow(static_cast<double>(N), 1.0 / dim) - 1e-9));
    while (static_cast<long>(std::pow(n, dim)) < N) ++n;
    return n;
}

} // namespace

MDEngine::MDEngine(MDSystem sys) : sys_(std::move(sys)) {
    sys_.validate();
    const std::size_t n = static_cast<std::size_t>(sys_.N) * sys_.dim;
    st_.x.assign(n, 0.0);
    st_.xu.assign(n, 0.0);
    st_.v.assign(n, 0.0);
    st_.f.assign(n, 0.0);
    st_.anchor.assign(n, 0.0);
    st_.local.assign(sys_.N, 0.0);
    st_.stress.assign(static_cast<std::size_t>(sys_.N) * sys_.dim * sys_.dim, 0.0);
    st_.nbr_count.assign(sys_.N, 0);
    set_thermostat(sys_.thermostat);
    if (sys_.potential == PotentialKind::harmonic_lattice) build_lattice_bonds();
}

void MDEngine::set_thermostat(std::optional<LangevinParams> t) {
    sys_.thermostat = t;
    sys_.validate();
    rng_.clear();
    if (!t) return;
    const std::uint64_t s = *t->seed;
    for (int i = 0; i < sys_.N; ++i) {
        std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                          static_cast<std::uint32_t>(i), 0x4d44u};
        rng_.emplace_back(seq);
    }
}

void MDEngine::build_lattice_bonds() {
    const int n = side_count(sys_.N, sys_.dim);
    if (static_cast<long>(std::pow(n, sys_.dim)) != sys_.N || n < 3)
        throw ConfigError("harmonic lattice needs N = n^dim with n >= 3");
    if (std::abs(n * sys_.harmonic.a - sys_.box) > 1e-9 * sys_.box)
        throw ConfigError("harmonic lattice needs box = n * a");
    bonds_.clear();
    bond_vec_.clear();
    auto index = [&](std::array<int, 3> c) {
        int id = 0;
        for (int l = 0; l < sys_.dim; ++l) id = id * n + ((c[l] % n) + n) % n;
        return id;
    };
    for (int id = 0; id < sys_.N; ++id) {
        std::array<int, 3> c{0, 0, 0};
        int r = id;
        for (int l = sys_.dim - 1; l >= 0; --l) {
            c[l] = r % n;
            r /= n;
        }
        for (int l = 0; l < sys_.dim; ++l) {
            auto c2 = c;
            c2[l] += 1;
            bonds_.push_back({index(c2), id});
            std::array<double, 3> e{0, 0, 0};
            e[l] = sys_.harmonic.a;
            bond_vec_.push_back(e);   // r_first - r_second = +a e_l at rest
        }
    }
}

void MDEngine::lattice_start(double T, std::uint64_t seed) {
    const int d = sys_.dim;
    const int n = side_count(sys_.N, d);
    const double spacing = sys_.box / n;
    for (int id = 0; id < sys_.N; ++id) {
        int r = id;
        for (int l = d - 1; l >= 0; --l) {
            st_.x[id * d + l] = (r % n + 0.5) * spacing;
            r /= n;
        }
    }
    st_.xu = st_.x;
    st_.anchor = st_.x;
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const double sd = std::sqrt(T / sys_.mass);
    for (auto& vi : st_.v) vi = sd * nd(gen);
    if (sys_.N > 1) {
        for (int l = 0; l < d; ++l) {
            double m = 0.0;
            for (int i = 0; i < sys_.N; ++i) m += st_.v[i * d + l];
            m /= sys_.N;
            for (int i = 0; i < sys_.N; ++i) st_.v[i * d + l] -= m;
        }
        const double dof = static_cast<double>(d) * (sys_.N - 1);
        const double ke = kinetic_energy();
        if (ke > 0.0 && T > 0.0) {
            const double s = std::sqrt(0.5 * dof * T / ke);
            for (auto& vi : st_.v) vi *= s;
        }
    }
    st_.step = 0;
    compute_forces();
}

void MDEngine::set_state(const MDState& s) {
    const std::size_t n = static_cast<std::size_t>(sys_.N) * sys_.dim;
    if (s.x.size() != n || s.v.size() != n) throw ShapeError("MD state size mismatch");
    st_.x = s.x;
    st_.v = s.v;
    st_.xu = s.xu.size() == n ? s.xu : s.x;
    st_.anchor = s.anchor.size() == n ? s.anchor : s.x;
    st_.step = s.step;
    compute_forces();
}

double MDEngine::kinetic_energy() const {
    double s = 0.0;
    for (double vi : st_.v) s += vi * vi;
    return 0.5 * sys_.mass * s;
}

std::array<double, 3> MDEngine::total_momentum() const {
    std::array<double, 3> p{0, 0, 0};
    for (int i = 0; i < sys_.N; ++i)
        for (int l = 0; l < sys_.dim; ++l) p[l] += sys_.mass * st_.v[i * sys_.dim + l];
    return p;
}

void MDEngine::compute_forces() {
    const int d = sys_.dim;
    const int N = sys_.N;
    std::fill(st_.f.begin(), st_.f.end(), 0.0);
    std::fill(st_.local.begin(), st_.local.end(), 0.0);
    std::fill(st_.stress.begin(), st_.stress.end(), 0.0);
    std::fill(st_.nbr_count.begin(), st_.nbr_count.end(), 0);
    st_.potential = 0.0;
    st_.virial = 0.0;
    const double share = sys_.full_pair_local ? 1.0 : 0.5;
    const double L = sys_.box;

    auto pair = [&](int i, int j, const double* r, const double* fij, double e) {
        for (int l = 0; l < d; ++l) {
            st_.f[i * d + l] += fij[l];
            st_.f[j * d + l] -= fij[l];
        }
        st_.potential += e;
        st_.local[i] += share * e;
        st_.local[j] += share * e;
        for (int a = 0; a < d; ++a) {
            st_.virial += r[a] * fij[a];
            for (int b = 0; b < d; ++b) {
                const double w = 0.5 * r[a] * fij[b];
                st_.stress[(i * d + a) * d + b] += w;
                st_.stress[(j * d + a) * d + b] += w;
            }
        }
        st_.nbr_count[i] += 1;
        st_.nbr_count[j] += 1;
    };

    switch (sys_.potential) {
    case PotentialKind::none: break;
    case PotentialKind::lennard_jones: {
        const double s2 = sys_.lj.sigma * sys_.lj.sigma;
        const double rc2 = sys_.lj.cutoff * sys_.lj.cutoff;
        const double src6 = std::pow(s2 / rc2, 3);
        const double shift = 4.0 * sys_.lj.epsilon * (src6 * src6 - src6);
        double r[3], fij[3];
        for (int i = 0; i < N; ++i) {
            for (int j = i + 1; j < N; ++j) {
                double r2 = 0.0;
                for (int l = 0; l < d; ++l) {
                    double dx = st_.x[i * d + l] - st_.x[j * d + l];
                    dx -= L * std::nearbyint(dx / L);
                    r[l] = dx;
                    r2 += dx * dx;
                }
                if (r2 >= rc2) continue;
                const double sr2 = s2 / r2;
                const double sr6 = sr2 * sr2 * sr2;
                const double e = 4.0 * sys_.lj.epsilon * (sr6 * sr6 - sr6) - shift;
                const double fr = 24.0 * sys_.lj.epsilon * (2.0 * sr6 * sr6 - sr6) / r2;
                for (int l = 0; l < d; ++l) fij[l] = fr * r[l];
                pair(i, j, r, fij, e);
            }
        }
        break;
    }
    case PotentialKind::harmonic_lattice: {
        double r[3], fij[3];
        for (std::size_t b = 0; b < bonds_.size(); ++b) {
            const int i = bonds_[b][0], j = bonds_[b][1];
            double e = 0.0;
            for (int l = 0; l < d; ++l) {
                double dx = st_.x[i * d + l] - st_.x[j * d + l];
                dx -= L * std::nearbyint(dx / L);
                r[l] = dx;
                const double s = dx - bond_vec_[b][l];
                fij[l] = -sys_.harmonic.k * s;
                e += 0.5 * sys_.harmonic.k * s * s;
            }
            pair(i, j, r, fij, e);
        }
        break;
    }
    case PotentialKind::trap: {
        for (int i = 0; i < N; ++i) {
            double e = 0.0;
            for (int l = 0; l < d; ++l) {
                const double s = st_.xu[i * d + l] - st_.anchor[i * d + l];
                st_.f[i * d + l] = -sys_.harmonic.k * s;
                e += 0.5 * sys_.harmonic.k * s * s;
            }
            st_.local[i] = e;
            st_.potential += e;
        }
        break;
    }
    }
}

void MDEngine::check_blowup() const {
    const double vmax = 100.0 * std::sqrt(std::max(sys_.blowup_T, 1e-12) * sys_.dim / sys_.mass);
    const int d = sys_.dim;
    for (int i = 0; i < sys_.N; ++i) {
        double s = 0.0;
        for (int l = 0; l < d; ++l) s += st_.v[i * d + l] * st_.v[i * d + l];
        if (!(std::sqrt(s) <= vmax)) {
            std::ostringstream os;
            os << "MD blow-up at step " << st_.step << ": particle " << i << " speed " << std::sqrt(s)
               << " exceeds " << vmax;
            throw BlowUpError(os.str());
        }
    }
}

void MDEngine::step() {
    const int d = sys_.dim;
    const std::size_t n = st_.v.size();
    const double h = sys_.dt;
    const double im = 1.0 / sys_.mass;
    const double L = sys_.box;
    auto drift = [&](double tau) {
        for (std::size_t k = 0; k < n; ++k) {
            const double dx = tau * st_.v[k];
            st_.xu[k] += dx;
            double x = st_.x[k] + dx;
            x -= L * std::floor(x / L);
            st_.x[k] = x;
        }
    };
    for (std::size_t k = 0; k < n; ++k) st_.v[k] += 0.5 * h * st_.f[k] * im;
    if (sys_.thermostat) {
        drift(0.5 * h);
        const double c1 = std::exp(-sys_.thermostat->gamma * h);
        const double c2 = std::sqrt(std::max(0.0, 1.0 - c1 * c1)) * std::sqrt(sys_.thermostat->T * im);
        for (int i = 0; i < sys_.N; ++i) {
            std::normal_distribution<double> nd(0.0, 1.0);
            for (int l = 0; l < d; ++l) st_.v[i * d + l] = c1 * st_.v[i * d + l] + c2 * nd(rng_[i]);
        }
        drift(0.5 * h);
    } else {
        drift(h);
    }
    compute_forces();
    for (std::size_t k = 0; k < n; ++k) st_.v[k] += 0.5 * h * st_.f[k] * im;
    ++st_.step;
    check_blowup();
}

void MDEngine::run(long steps) {
    for (long s = 0; s < steps; ++s) step();
}

void MDEngine::record(MDTrajectory& tr, const RecordSpec& rec) const {
    const int d = sys_.dim;
    const int N = sys_.N;
    const double m = sys_.mass;
    const double V = sys_.volume();
    tr.times.push_back(st_.step * sys_.dt);
    if (rec.positions) tr.pos.insert(tr.pos.end(), st_.xu.begin(), st_.xu.end());
    if (rec.velocities) tr.vel.insert(tr.vel.end(), st_.v.begin(), st_.v.end());
    if (rec.forces) tr.force.insert(tr.force.end(), st_.f.begin(), st_.f.end());
    if (rec.local) tr.local.insert(tr.local.end(), st_.local.begin(), st_.local.end());
    const double ke = kinetic_energy();
    tr.kinetic.push_back(ke);
    tr.potential.push_back(st_.potential);
    tr.virial.push_back(st_.virial);
    tr.pressure.push_back((2.0 * ke + st_.virial) / (d * V));
    double zsum = 0.0;
    for (int c : st_.nbr_count) zsum += c;
    tr.nbr_mean.push_back(zsum / N);

    if (rec.transport) {
        for (int i = 0; i < N; ++i) {
            const double* vi = &st_.v[i * d];
            const double* S = &st_.stress[i * d * d];
            std::array<double, MDTrajectory::kTransport> y{};
            const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
            for (int c = 0; c < 3; ++c) {
                const int a = pairs[c][0], b = pairs[c][1];
                if (a < d && b < d) y[c] = (m * vi[a] * vi[b] + S[a * d + b]) / V;
            }
            double v2 = 0.0, trS = 0.0;
            for (int l = 0; l < d; ++l) {
                v2 += vi[l] * vi[l];
                trS += S[l * d + l];
            }
            y[3] = (m * v2 + trS) / (d * V);
            const double eps = 0.5 * m * v2 + st_.local[i];
            for (int a = 0; a < d; ++a) {
                double sv = 0.0;
                for (int b = 0; b < d; ++b) sv += S[a * d + b] * vi[b];
                y[4 + a] = (vi[a] * eps + sv) / V;
            }
            tr.transport.insert(tr.transport.end(), y.begin(), y.end());
        }
        // full-neighbourhood local Hamiltonian
        std::vector<double> ki(N);
        for (int i = 0; i < N; ++i) {
            double s = 0.0;
            for (int l = 0; l < d; ++l) s += st_.v[i * d + l] * st_.v[i * d + l];
            ki[i] = 0.5 * m * s;
        }
        std::vector<double> lh(N);
        for (int i = 0; i < N; ++i) lh[i] = ki[i] + st_.local[i];
        if (sys_.potential == PotentialKind::lennard_jones) {
            const double rc2 = sys_.lj.cutoff * sys_.lj.cutoff;
            for (int i = 0; i < N; ++i)
                for (int j = i + 1; j < N; ++j) {
                    double r2 = 0.0;
                    for (int l = 0; l < d; ++l) {
                        double dx = st_.x[i * d + l] - st_.x[j * d + l];
                        dx -= sys_.box * std::nearbyint(dx / sys_.box);
                        r2 += dx * dx;
                    }
                    if (r2 < rc2) {
                        lh[i] += ki[j];
                        lh[j] += ki[i];
                    }
                }
        } else if (sys_.potential == PotentialKind::harmonic_lattice) {
            for (const auto& b : bonds_) {
                lh[b[0]] += ki[b[1]];
                lh[b[1]] += ki[b[0]];
            }
        }
        tr.local_h.insert(tr.local_h.end(), lh.begin(), lh.end());
    }
}

MDTrajectory MDEngine::integrate(long steps, int sample_every, RecordSpec rec) {
    if (steps < 0 || sample_every < 1) throw ConfigError("integrate: steps >= 0 and sample_every >= 1 required");
    MDTrajectory tr;
    tr.N = sys_.N;
    tr.dim = sys_.dim;
    tr.box = sys_.box;
    tr.mass = sys_.mass;
    tr.volume = sys_.volume();
    tr.dt_sample = sys_.dt * sample_every;
    record(tr, rec);
    for (long s = 1; s <= steps; ++s) {
        step();
        if (s % sample_every == 0) record(tr, rec);
    }
    return tr;
}

MDTrajectory integrate(const MDSystem& sys, MDState& state, long steps, int sample_every) {
    MDEngine eng(sys);
    eng.set_state(state);
    MDTrajectory tr = eng.integrate(steps, sample_every);
    state = eng.state();
    return tr;
}

} // namespace tub
