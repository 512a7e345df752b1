#include "confgap/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "confgap/errors.hpp"

namespace confgap {

namespace {

double orient(Point a, Point b, Point c) { return cross(b - a, c - a); }

// > 0 when d lies strictly inside the circle through the counterclockwise a, b, c;
// results inside the rounding band count as cocircular
double incircle(Point a, Point b, Point c, Point d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double al = adx * adx + ady * ady;
    const double bl = bdx * bdx + bdy * bdy;
    const double cl = cdx * cdx + cdy * cdy;
    const double det = al * (bdx * cdy - bdy * cdx) + bl * (cdx * ady - cdy * adx) + cl * (adx * bdy - ady * bdx);
    const double perm = al * (std::fabs(bdx * cdy) + std::fabs(bdy * cdx)) +
                        bl * (std::fabs(cdx * ady) + std::fabs(cdy * adx)) +
                        cl * (std::fabs(adx * bdy) + std::fabs(ady * bdx));
    return det > 1e-12 * perm ? det : 0.0;
}

Point circumcenter(Point a, Point b, Point c) {
    const Vec2 ab = b - a, ac = c - a;
    const double d = 2.0 * cross(ab, ac);
    const double l1 = ab.sq_norm(), l2 = ac.sq_norm();
    return {a.x + (ac.y * l1 - ab.y * l2) / d, a.y + (ab.x * l2 - ac.x * l1) / d};
}

double min_angle(Point a, Point b, Point c) {
    auto angle = [](Point p, Point q, Point r) {
        const Vec2 u = q - p, v = r - p;
        return std::atan2(std::fabs(cross(u, v)), dot(u, v));
    };
    return std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
}

double longest_edge(Point a, Point b, Point c) {
    return std::sqrt(std::max({(b - a).sq_norm(), (c - b).sq_norm(), (a - c).sq_norm()}));
}

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> n;  // n[i] is across the edge opposite v[i]
};

Tri rotated(const Tri& t, int k) {
    return {{t.v[k], t.v[(k + 1) % 3], t.v[(k + 2) % 3]}, {t.n[k], t.n[(k + 1) % 3], t.n[(k + 2) % 3]}};
}

/// Incremental Delaunay triangulation by point location and Lawson flips
/// inside a super triangle whose vertices are 0, 1, 2.
class Delaunay {
public:
    Delaunay(Point lo, Point hi) {
        const Point c = (lo + hi) * 0.5;
        const double r = 20.0 * std::max({(hi - lo).norm(), 1e-300});
        pts_ = {{c.x - 2.0 * r, c.y - r}, {c.x + 2.0 * r, c.y - r}, {c.x, c.y + 2.0 * r}};
        tris_.push_back({{0, 1, 2}, {-1, -1, -1}});
    }

    const std::vector<Point>& points() const { return pts_; }
    const std::vector<Tri>& triangles() const { return tris_; }
    int last_triangle() const { return last_; }

    /// Returns the vertex index; an existing index when p coincides with a vertex.
    int insert(Point p, int hint = -1) {
        const int t = locate(p, hint < 0 ? last_ : hint);
        const Tri& T = tris_[static_cast<std::size_t>(t)];
        double scale = 0.0;
        for (int i = 0; i < 3; ++i) scale = std::max(scale, (pts_[static_cast<std::size_t>(T.v[i])] - p).norm());
        for (int i = 0; i < 3; ++i) {
            if ((pts_[static_cast<std::size_t>(T.v[i])] - p).norm() <= 1e-12 * scale) return T.v[i];
        }
        const int ip = static_cast<int>(pts_.size());
        pts_.push_back(p);
        for (int i = 0; i < 3; ++i) {
            const Point a = pts_[static_cast<std::size_t>(T.v[(i + 1) % 3])];
            const Point b = pts_[static_cast<std::size_t>(T.v[(i + 2) % 3])];
            const double len2 = (b - a).sq_norm();
            if (std::fabs(orient(a, b, p)) <= 1e-12 * len2) {
                split_edge(t, i, ip);
                return ip;
            }
        }
        split_triangle(t, ip);
        return ip;
    }

    int locate(Point p, int t) const {
        if (t < 0 || static_cast<std::size_t>(t) >= tris_.size()) t = 0;
        const std::size_t cap = 4 * tris_.size() + 100;
        for (std::size_t step = 0; step < cap; ++step) {
            const Tri& T = tris_[static_cast<std::size_t>(t)];
            bool moved = false;
            for (int k = 0; k < 3; ++k) {
                const int i = static_cast<int>((step + static_cast<std::size_t>(k)) % 3);
                const Point a = pts_[static_cast<std::size_t>(T.v[(i + 1) % 3])];
                const Point b = pts_[static_cast<std::size_t>(T.v[(i + 2) % 3])];
                if (orient(a, b, p) < 0.0 && T.n[i] >= 0) {
                    t = T.n[i];
                    moved = true;
                    break;
                }
            }
            if (!moved) return t;
        }
        // the walk can cycle on rounding ties; fall back to the best containing triangle
        int best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < tris_.size(); ++i) {
            const Tri& T = tris_[i];
            double worst = std::numeric_limits<double>::infinity();
            for (int k = 0; k < 3; ++k) {
                worst = std::min(worst, orient(pts_[static_cast<std::size_t>(T.v[(k + 1) % 3])],
                                               pts_[static_cast<std::size_t>(T.v[(k + 2) % 3])], p));
            }
            if (worst > best_score) {
                best_score = worst;
                best = static_cast<int>(i);
            }
        }
        return best;
    }

private:
    void relink(int t, int from, int to) {
        if (t < 0) return;
        for (int& n : tris_[static_cast<std::size_t>(t)].n) {
            if (n == from) {
                n = to;
                return;
            }
        }
    }

    void split_triangle(int t, int p) {
        const Tri T = tris_[static_cast<std::size_t>(t)];
        const int a = T.v[0], b = T.v[1], c = T.v[2];
        const int na = T.n[0], nb = T.n[1], nc = T.n[2];
        const int t0 = t;
        const int t1 = static_cast<int>(tris_.size());
        const int t2 = t1 + 1;
        tris_[static_cast<std::size_t>(t0)] = {{a, b, p}, {t1, t2, nc}};
        tris_.push_back({{b, c, p}, {t2, t0, na}});
        tris_.push_back({{c, a, p}, {t0, t1, nb}});
        relink(na, t, t1);
        relink(nb, t, t2);
        last_ = t0;
        legalize({t0, t1, t2}, p);
    }

    void split_edge(int t, int i, int p) {
        const Tri T = rotated(tris_[static_cast<std::size_t>(t)], i);
        const int a = T.v[0], b = T.v[1], c = T.v[2];
        const int u = T.n[0], nb = T.n[1], nc = T.n[2];
        tris_[static_cast<std::size_t>(t)] = T;
        if (u < 0) {
            const int t1 = static_cast<int>(tris_.size());
            tris_[static_cast<std::size_t>(t)] = {{a, b, p}, {-1, t1, nc}};
            tris_.push_back({{a, p, c}, {-1, nb, t}});
            relink(nb, t, t1);
            last_ = t;
            legalize({t, t1}, p);
            return;
        }
        int j = 0;
        while (tris_[static_cast<std::size_t>(u)].n[j] != t) ++j;
        const Tri U = rotated(tris_[static_cast<std::size_t>(u)], j);
        const int d = U.v[0];
        const int mc = U.n[1], mb = U.n[2];
        const int t1 = static_cast<int>(tris_.size());
        const int u1 = t1 + 1;
        tris_[static_cast<std::size_t>(t)] = {{a, b, p}, {u1, t1, nc}};
        tris_.push_back({{a, p, c}, {u, nb, t}});
        tris_[static_cast<std::size_t>(u)] = {{d, c, p}, {t1, u1, mb}};
        tris_.push_back({{d, p, b}, {t, mc, u}});
        relink(nb, t, t1);
        relink(mc, u, u1);
        last_ = t;
        legalize({t, t1, u, u1}, p);
    }

    void legalize(std::initializer_list<int> start, int p) {
        std::vector<int> stack(start);
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            const Tri& cur = tris_[static_cast<std::size_t>(t)];
            int k = 0;
            while (k < 3 && cur.v[k] != p) ++k;
            if (k == 3) continue;
            const Tri T = rotated(cur, k);
            const int u = T.n[0];
            if (u < 0) continue;
            int j = 0;
            while (tris_[static_cast<std::size_t>(u)].n[j] != t) ++j;
            const Tri U = rotated(tris_[static_cast<std::size_t>(u)], j);
            const int b = T.v[1], c = T.v[2], d = U.v[0];
            const Point P = pts_[static_cast<std::size_t>(p)], B = pts_[static_cast<std::size_t>(b)];
            const Point C = pts_[static_cast<std::size_t>(c)], D = pts_[static_cast<std::size_t>(d)];
            if (incircle(P, B, C, D) <= 0.0) continue;
            if (orient(P, B, D) <= 0.0 || orient(P, D, C) <= 0.0) continue;
            const int tb = T.n[1], tc = T.n[2];
            const int uc = U.n[1], ub = U.n[2];
            tris_[static_cast<std::size_t>(t)] = {{p, b, d}, {uc, u, tc}};
            tris_[static_cast<std::size_t>(u)] = {{p, d, c}, {ub, tb, t}};
            relink(uc, u, t);
            relink(tb, t, u);
            stack.push_back(t);
            stack.push_back(u);
        }
    }

    std::vector<Point> pts_;
    std::vector<Tri> tris_;
    int last_ = 0;
};

/// Uniform bucket grid over the plane, keyed by an integer cell index pair.
class BucketGrid {
public:
    explicit BucketGrid(double cell) : cell_(cell) {}

    void add(Point p, int id) { cells_[key(p)].push_back(id); }

    template <typename Fn>
    void visit(Point center, double radius, Fn&& fn) const {
        const auto lo = index(center - Vec2{radius, radius});
        const auto hi = index(center + Vec2{radius, radius});
        for (std::int64_t i = lo.first; i <= hi.first; ++i) {
            for (std::int64_t j = lo.second; j <= hi.second; ++j) {
                const auto it = cells_.find({i, j});
                if (it == cells_.end()) continue;
                for (int id : it->second) fn(id);
            }
        }
    }

private:
    std::pair<std::int64_t, std::int64_t> index(Point p) const {
        return {static_cast<std::int64_t>(std::floor(p.x / cell_)), static_cast<std::int64_t>(std::floor(p.y / cell_))};
    }
    std::pair<std::int64_t, std::int64_t> key(Point p) const { return index(p); }

    double cell_;
    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<int>> cells_;
};

class Refiner {
public:
    Refiner(const Domain2D& domain, double h, const MeshOptions& opt)
        : domain_(domain), h_(h), opt_(opt), dt_(bbox_lo(domain), bbox_hi(domain)), vgrid_(h), sgrid_(h) {
        // input corners sharper than 60 degrees cannot be meshed at the target angle;
        // triangles next to them are only held to the edge-length bound
        const auto& poly = domain.vertices();
        for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
            const Vec2 u = poly[(i + n - 1) % n] - poly[i], w = poly[(i + 1) % n] - poly[i];
            const double ang = std::atan2(std::fabs(cross(u, w)), dot(u, w));
            if (ang < std::numbers::pi / 3.0) sharp_.push_back(poly[i]);
        }
    }

    TriMesh run() {
        insert_boundary();
        insert_lattice();
        split_encroached();
        refine_quality();
        return extract();
    }

private:
    struct Segment {
        int a, b;
        bool alive;
    };

    static Point bbox_lo(const Domain2D& d) {
        Point lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
        for (const Point& p : d.vertices()) lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        return lo;
    }
    static Point bbox_hi(const Domain2D& d) {
        Point hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
        for (const Point& p : d.vertices()) hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
        return hi;
    }

    int add_vertex(Point p, int hint = -1) {
        const std::size_t before = dt_.points().size();
        const int id = dt_.insert(p, hint);
        if (dt_.points().size() > before) vgrid_.add(p, id);
        if (dt_.points().size() > opt_.max_vertices) {
            throw RefinementFailure("mesh refinement exceeded " + std::to_string(opt_.max_vertices) + " vertices");
        }
        return id;
    }

    void add_segment(int a, int b) {
        const int id = static_cast<int>(segs_.size());
        segs_.push_back({a, b, true});
        sgrid_.add((pt(a) + pt(b)) * 0.5, id);
    }

    Point pt(int i) const { return dt_.points()[static_cast<std::size_t>(i)]; }

    void insert_boundary() {
        const auto& poly = domain_.vertices();
        std::vector<int> ids;
        for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
            const Point a = poly[i], b = poly[(i + 1) % n];
            const int pieces = std::max(1, static_cast<int>(std::ceil((b - a).norm() / h_ - 1e-9)));
            for (int k = 0; k < pieces; ++k) ids.push_back(add_vertex(a + (b - a) * (static_cast<double>(k) / pieces)));
        }
        for (std::size_t i = 0, n = ids.size(); i < n; ++i) add_segment(ids[i], ids[(i + 1) % n]);
    }

    void insert_lattice() {
        const Point lo = bbox_lo(domain_), hi = bbox_hi(domain_);
        const double dy = h_ * std::sqrt(3.0) / 2.0;
        const int rows = static_cast<int>(std::ceil((hi.y - lo.y) / dy)) + 1;
        const int cols = static_cast<int>(std::ceil((hi.x - lo.x) / h_)) + 2;
        const double clearance = opt_.boundary_clearance * h_;
        for (int j = 0; j < rows; ++j) {
            const double y = lo.y + (j + 0.5) * dy;
            const double shift = (j % 2) ? 0.5 * h_ : 0.0;
            for (int c = 0; c < cols; ++c) {
                const int i = (j % 2) ? cols - 1 - c : c;  // serpentine order keeps walks short
                const Point p{lo.x + shift + i * h_, y};
                if (!domain_.contains(p) || domain_.distance_to_boundary(p) < clearance) continue;
                add_vertex(p);
            }
        }
    }

    bool encroaches(int s, Point p) const {
        const Point a = pt(segs_[static_cast<std::size_t>(s)].a), b = pt(segs_[static_cast<std::size_t>(s)].b);
        const Point m = (a + b) * 0.5;
        const double r2 = 0.25 * (b - a).sq_norm();
        return (p - m).sq_norm() < r2 * (1.0 + 1e-9) && !(p == a) && !(p == b);
    }

    bool segment_encroached(int s) const {
        const Segment& seg = segs_[static_cast<std::size_t>(s)];
        const Point a = pt(seg.a), b = pt(seg.b);
        const Point m = (a + b) * 0.5;
        const double r = 0.5 * (b - a).norm();
        bool hit = false;
        vgrid_.visit(m, r, [&](int v) {
            if (!hit && v != seg.a && v != seg.b && encroaches(s, pt(v))) hit = true;
        });
        return hit;
    }

    // every live segment whose diametral disk contains p
    std::vector<int> segments_encroached_by(Point p) const {
        std::vector<int> out;
        sgrid_.visit(p, 0.5 * h_ + 1e-12, [&](int s) {
            if (segs_[static_cast<std::size_t>(s)].alive && encroaches(s, p)) out.push_back(s);
        });
        std::sort(out.begin(), out.end());
        return out;
    }

    void split_segment(int s) {
        Segment& seg = segs_[static_cast<std::size_t>(s)];
        if (!seg.alive) return;
        seg.alive = false;
        const int a = seg.a, b = seg.b;
        const int m = add_vertex((pt(a) + pt(b)) * 0.5);
        add_segment(a, m);
        add_segment(m, b);
        for (int t : segments_encroached_by(pt(m))) queue_.push_back(t);
        queue_.push_back(static_cast<int>(segs_.size()) - 2);
        queue_.push_back(static_cast<int>(segs_.size()) - 1);
    }

    void drain_queue() {
        while (!queue_.empty()) {
            const int s = queue_.back();
            queue_.pop_back();
            if (segs_[static_cast<std::size_t>(s)].alive && segment_encroached(s)) split_segment(s);
        }
    }

    void split_encroached() {
        for (std::size_t s = 0; s < segs_.size(); ++s) queue_.push_back(static_cast<int>(s));
        std::reverse(queue_.begin(), queue_.end());
        drain_queue();
        ensure_segments_present();
    }

    // rounding can leave a cocircular segment out of the triangulation; bisecting fixes it
    void ensure_segments_present() {
        for (int round = 0; round < 64; ++round) {
            std::unordered_set<std::uint64_t> edges;
            for (const Tri& t : dt_.triangles()) {
                for (int k = 0; k < 3; ++k) edges.insert(edge_key(t.v[k], t.v[(k + 1) % 3]));
            }
            std::vector<int> missing;
            for (std::size_t s = 0; s < segs_.size(); ++s) {
                if (segs_[s].alive && !edges.count(edge_key(segs_[s].a, segs_[s].b))) missing.push_back(static_cast<int>(s));
            }
            if (missing.empty()) return;
            for (int s : missing) split_segment(s);
            drain_queue();
        }
        throw RefinementFailure("boundary segments could not be recovered in the triangulation");
    }

    std::vector<char> inside_flags() const {
        std::unordered_set<std::uint64_t> seg_edges;
        for (const Segment& s : segs_) {
            if (s.alive) seg_edges.insert(edge_key(s.a, s.b));
        }
        const auto& tris = dt_.triangles();
        std::vector<char> outside(tris.size(), 0);
        std::vector<int> stack;
        for (std::size_t t = 0; t < tris.size(); ++t) {
            const auto& v = tris[t].v;
            if (v[0] < 3 || v[1] < 3 || v[2] < 3) {
                outside[t] = 1;
                stack.push_back(static_cast<int>(t));
            }
        }
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            const Tri& T = tris[static_cast<std::size_t>(t)];
            for (int k = 0; k < 3; ++k) {
                const int u = T.n[k];
                if (u < 0 || outside[static_cast<std::size_t>(u)]) continue;
                if (seg_edges.count(edge_key(T.v[(k + 1) % 3], T.v[(k + 2) % 3]))) continue;
                outside[static_cast<std::size_t>(u)] = 1;
                stack.push_back(u);
            }
        }
        std::vector<char> inside(tris.size());
        for (std::size_t t = 0; t < tris.size(); ++t) inside[t] = !outside[t];
        return inside;
    }

    bool near_sharp_corner(Point p) const {
        for (const Point& q : sharp_) {
            if ((p - q).norm() <= h_) return true;
        }
        return false;
    }

    bool is_bad(const Tri& t) const {
        const Point a = pt(t.v[0]), b = pt(t.v[1]), c = pt(t.v[2]);
        if (longest_edge(a, b, c) > opt_.max_edge_factor * h_) return true;
        if (min_angle(a, b, c) >= opt_.min_angle_degrees * std::numbers::pi / 180.0) return false;
        return !(near_sharp_corner(a) || near_sharp_corner(b) || near_sharp_corner(c));
    }

    void refine_quality() {
        constexpr int kMaxPasses = 400;
        for (int pass = 0; pass < kMaxPasses; ++pass) {
            const auto inside = inside_flags();
            std::vector<std::pair<int, std::array<int, 3>>> bad;
            const auto& tris = dt_.triangles();
            for (std::size_t t = 0; t < tris.size(); ++t) {
                if (inside[t] && is_bad(tris[t])) bad.push_back({static_cast<int>(t), tris[t].v});
            }
            if (bad.empty()) return;
            std::size_t progress = 0;
            for (const auto& [t, verts] : bad) {
                const Tri& cur = dt_.triangles()[static_cast<std::size_t>(t)];
                if (cur.v != verts) continue;
                const Point c = circumcenter(pt(verts[0]), pt(verts[1]), pt(verts[2]));
                const auto hit = segments_encroached_by(c);
                if (!hit.empty()) {
                    for (int s : hit) split_segment(s);
                    drain_queue();
                    ++progress;
                    continue;
                }
                if (!std::isfinite(c.x) || !std::isfinite(c.y) || !domain_.contains(c)) continue;
                add_vertex(c, t);
                ++progress;
            }
            ensure_segments_present();
            if (progress == 0) {
                std::ostringstream msg;
                msg << "mesh refinement stalled with " << bad.size() << " bad triangles at h=" << h_;
                throw RefinementFailure(msg.str());
            }
        }
        std::ostringstream msg;
        msg << "mesh refinement did not finish in " << kMaxPasses << " passes (" << dt_.points().size()
            << " vertices, h=" << h_ << ")";
        throw RefinementFailure(msg.str());
    }

    TriMesh extract() const {
        const auto inside = inside_flags();
        const auto& tris = dt_.triangles();
        std::vector<int> remap(dt_.points().size(), -1);
        TriMesh mesh;
        for (std::size_t t = 0; t < tris.size(); ++t) {
            if (!inside[t]) continue;
            std::array<int, 3> tri{};
            for (int k = 0; k < 3; ++k) {
                const int v = tris[t].v[k];
                if (v < 3) throw RefinementFailure("interior triangle touches the super triangle");
                if (remap[static_cast<std::size_t>(v)] < 0) {
                    remap[static_cast<std::size_t>(v)] = static_cast<int>(mesh.vertices.size());
                    mesh.vertices.push_back(pt(v));
                }
                tri[static_cast<std::size_t>(k)] = remap[static_cast<std::size_t>(v)];
            }
            mesh.triangles.push_back(tri);
        }
        mesh.boundary.assign(mesh.vertices.size(), false);
        for (const Segment& s : segs_) {
            if (!s.alive) continue;
            for (int v : {s.a, s.b}) {
                const int r = remap[static_cast<std::size_t>(v)];
                if (r < 0) throw RefinementFailure("boundary vertex missing from the final mesh");
                mesh.boundary[static_cast<std::size_t>(r)] = true;
            }
        }
        for (const auto& t : mesh.triangles) {
            const Point a = mesh.vertices[static_cast<std::size_t>(t[0])];
            const Point b = mesh.vertices[static_cast<std::size_t>(t[1])];
            const Point c = mesh.vertices[static_cast<std::size_t>(t[2])];
            mesh.h_max = std::max(mesh.h_max, longest_edge(a, b, c));
        }
        return mesh;
    }

    const Domain2D& domain_;
    double h_;
    MeshOptions opt_;
    Delaunay dt_;
    BucketGrid vgrid_;
    BucketGrid sgrid_;
    std::vector<Segment> segs_;
    std::vector<int> queue_;
    std::vector<Point> sharp_;
};

}  // namespace

std::size_t TriMesh::num_interior() const { return static_cast<std::size_t>(std::count(boundary.begin(), boundary.end(), false)); }

double TriMesh::triangle_area(std::size_t t) const {
    const auto& tri = triangles[t];
    return 0.5 * orient(vertices[static_cast<std::size_t>(tri[0])], vertices[static_cast<std::size_t>(tri[1])],
                        vertices[static_cast<std::size_t>(tri[2])]);
}

double TriMesh::area() const {
    double s = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) s += triangle_area(t);
    return s;
}

double TriMesh::min_angle_degrees() const {
    double m = 180.0;
    for (const auto& t : triangles) {
        m = std::min(m, min_angle(vertices[static_cast<std::size_t>(t[0])], vertices[static_cast<std::size_t>(t[1])],
                                  vertices[static_cast<std::size_t>(t[2])]) *
                            180.0 / std::numbers::pi);
    }
    return m;
}

std::vector<std::vector<int>> TriMesh::vertex_neighbors() const {
    std::vector<std::vector<int>> nb(vertices.size());
    for (const auto& t : triangles) {
        for (int k = 0; k < 3; ++k) {
            auto& list = nb[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])];
            list.push_back(t[static_cast<std::size_t>((k + 1) % 3)]);
            list.push_back(t[static_cast<std::size_t>((k + 2) % 3)]);
        }
    }
    for (auto& list : nb) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return nb;
}

void TriMesh::validate() const {
    if (boundary.size() != vertices.size()) throw MalformedDomain("boundary flags do not match the vertex count");
    std::map<std::pair<int, int>, int> directed;
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const auto& tri = triangles[t];
        for (int v : tri) {
            if (v < 0 || static_cast<std::size_t>(v) >= vertices.size()) throw MalformedDomain("triangle index out of range");
        }
        if (!(triangle_area(t) > 1e-14)) {
            throw MalformedDomain("triangle " + std::to_string(t) + " is degenerate or clockwise");
        }
        for (int k = 0; k < 3; ++k) {
            const std::pair<int, int> e{tri[static_cast<std::size_t>(k)], tri[static_cast<std::size_t>((k + 1) % 3)]};
            if (++directed[e] > 1) throw MalformedDomain("edge used twice with the same orientation");
        }
    }
    for (const auto& [e, count] : directed) {
        const bool twin = directed.count({e.second, e.first}) > 0;
        if (!twin && (!boundary[static_cast<std::size_t>(e.first)] || !boundary[static_cast<std::size_t>(e.second)])) {
            throw MalformedDomain("hull edge between non-boundary vertices");
        }
    }
}

TriMesh triangulate(const Domain2D& domain, double h_target, const MeshOptions& options) {
    if (!(h_target > 0.0) || !std::isfinite(h_target)) throw MalformedDomain("mesh size must be positive");
    const auto& v = domain.vertices();
    double extent = 0.0;
    for (const Point& p : v) extent = std::max(extent, (p - v.front()).norm());
    if (h_target > extent) throw MalformedDomain("mesh size exceeds the domain extent");
    Refiner refiner(domain, h_target, options);
    TriMesh mesh = refiner.run();
    mesh.validate();
    return mesh;
}

void write_mesh_csv(const TriMesh& mesh, std::ostream& vertices_out, std::ostream& triangles_out) {
    vertices_out.precision(17);
    vertices_out << "index,x,y,boundary\n";
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        vertices_out << i << ',' << mesh.vertices[i].x << ',' << mesh.vertices[i].y << ',' << (mesh.boundary[i] ? 1 : 0)
                     << '\n';
    }
    triangles_out << "index,v0,v1,v2\n";
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        triangles_out << t << ',' << tri[0] << ',' << tri[1] << ',' << tri[2] << '\n';
    }
}

}  // namespace confgap
