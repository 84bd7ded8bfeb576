/*
 * olympus.h - the Olympus abstract machine.
 *
 * Generated translation units contain nothing but the mnemonics defined
 * here. Object addressing (ADDRL/ADDRF) is separate from the operation
 * mnemonics; every mnemonic is typed and consults no runtime type tag.
 *
 * Frames live on the C stack and are addressed through a display: a flat
 * table of frame pointers indexed by static nesting depth, so a foreign
 * access ADDRF(level, offset) is a constant number of loads at any depth.
 *
 * Compound values (vectors, complex numbers, strings, lambda environments)
 * live in a statically allocated heap managed by a sliding mark-compact
 * collector. Frame slots store stable handle indices, not raw pointers,
 * so compaction never has to rewrite generated-code temporaries.
 *
 * Build-time configuration:
 *   OLYMPUS_HEAP_BYTES  heap array size   (default 8388608; micro: 24576)
 *   OLYMPUS_INT64       1 for 64-bit ints (default 0: 32-bit)
 *   OLYMPUS_REAL32      1 for 32-bit reals(default 0: 64-bit)
 *   OLYMPUS_BOUNDS      0 disables vector bounds checks (default 1)
 */
#ifndef OLYMPUS_H
#define OLYMPUS_H

#include <inttypes.h>
#include <math.h>
#include <stdarg.h>
#include <stddef.h>
#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#ifndef OLYMPUS_HEAP_BYTES
#define OLYMPUS_HEAP_BYTES 8388608
#endif
#ifndef OLYMPUS_INT64
#define OLYMPUS_INT64 0
#endif
#ifndef OLYMPUS_REAL32
#define OLYMPUS_REAL32 0
#endif
#ifndef OLYMPUS_BOUNDS
#define OLYMPUS_BOUNDS 1
#endif

#if OLYMPUS_INT64
typedef int64_t olym_int;
typedef uint64_t olym_uint;
#define OLY_PRI_INT PRIi64
#else
typedef int32_t olym_int;
typedef uint32_t olym_uint;
#define OLY_PRI_INT PRIi32
#endif

#if OLYMPUS_REAL32
typedef float olym_real;
#else
typedef double olym_real;
#endif

typedef uint32_t olym_handle; /* index into the handle table; 0 is null */

typedef union {
    olym_int i;
    olym_real r;
    olym_handle h;
} olym_slot;

/* heap payload cells: distinct types from frame-slot members, so element
   accesses provably never alias frame slots and loops keep the vector
   base and loop index in registers */
typedef struct { olym_int v; } olym_icell;
typedef struct { olym_real v; } olym_rcell;
typedef struct { olym_handle v; } olym_hcell;

typedef olym_slot olym_value; /* same cell at the call boundary */

/* scaled static tables: micro-core profiles shrink everything */
#if OLYMPUS_HEAP_BYTES >= 1048576
#define OLY_TS_MAX 4096
#define OLY_MAX_STRLITS 512
#else
#define OLY_TS_MAX 256
#define OLY_MAX_STRLITS 64
#endif
#define OLY_MAX_HANDLES (OLYMPUS_HEAP_BYTES / 16)
#define OLY_MAX_DEPTH 64
#define OLY_MAX_ARGS 16

enum { OLY_K_VEC = 1, OLY_K_STR = 2, OLY_K_CPLX = 3, OLY_K_ENV = 4 };

typedef struct {
    uint32_t reloc;  /* owning handle index: relocation bookkeeping */
    uint8_t kind;
    uint8_t esize;   /* vector element size in bytes */
    uint8_t eref;    /* nonzero: vector elements are handles (GC scans) */
    uint8_t _pad;
    uint32_t len;    /* element/char count; capture depth for env */
    uint32_t _pad2;
} olym_header;       /* 16 bytes; payload follows, 8-aligned */

typedef olym_value (*olym_fn)(const olym_value *);

typedef struct {
    olym_fn fn;
    olym_slot *frames[]; /* captured display prefix, [0..len) */
} olym_env;

typedef struct olym_guard {
    olym_slot *frame;
    const char *map; /* per-slot kind chars; 'h' marks handle slots */
    int size;
    int depth;
    size_t tmark;
    int prev_depth;
    olym_slot *saved_display;
    struct olym_guard *prev;
} olym_guard;

/* support unit state */
extern olym_slot *olym_display[OLY_MAX_DEPTH];
extern int olym_depth;
extern olym_guard *olym_guards;
extern olym_handle olym_ts[OLY_TS_MAX];
extern size_t olym_ts_top;
extern olym_handle olym_strlit_h[OLY_MAX_STRLITS];
extern void *olym_htable[OLY_MAX_HANDLES]; /* handle -> payload pointer */

typedef struct {
    size_t heap_bytes;
    size_t used;
    size_t live_objects;
    size_t collections;
    size_t freed_bytes;
    size_t peak_used;
    size_t frame_depth;
} olym_stats_t;

/* support unit entry points */
void olympus_main(void);
void olym_enter(olym_guard *g, olym_slot *frame, int size, int depth,
                const char *map);
void olym_leave(olym_guard *g);
void olym_init_strlits(const char *const *lits, int n);
void olym_trap(const char *msg) __attribute__((noreturn));
void olym_trap_index(long long idx, unsigned long long len)
    __attribute__((noreturn));
olym_handle olym_alloc(int kind, uint32_t len, uint8_t esize, uint8_t eref);
size_t olym_compact_now(void);
void olym_heap_stats(olym_stats_t *out);

static inline void *olym_payload(olym_handle h) { return olym_htable[h]; }
static inline olym_header *olym_hdr(olym_handle h) {
    return (olym_header *)((char *)olym_htable[h] - sizeof(olym_header));
}
olym_value olym_apply(olym_handle fnval, int argc, ...);
olym_handle olym_mklambda(olym_fn fn, int depth);
olym_handle olym_mkc(olym_real re, olym_real im);
olym_handle olym_cadd(olym_handle a, olym_handle b);
olym_handle olym_csub(olym_handle a, olym_handle b);
olym_handle olym_cmul(olym_handle a, olym_handle b);
olym_handle olym_cdiv(olym_handle a, olym_handle b);
olym_handle olym_cneg(olym_handle a);
olym_int olym_ceq(olym_handle a, olym_handle b);
olym_handle olym_scat(olym_handle a, olym_handle b);
olym_int olym_seq(olym_handle a, olym_handle b);
olym_handle olym_sidx(olym_handle s, olym_int i);
olym_handle olym_mkstr(const char *chars, uint32_t len);
olym_handle olym_mkvec_i(int n, ...);
olym_handle olym_mkvec_r(int n, ...);
olym_handle olym_mkvec_h(uint8_t eref_kind_is_handle, int n, ...);
olym_handle olym_repv(olym_handle src, olym_int count);
olym_int olym_toi_s(olym_handle s);
olym_real olym_tor_s(olym_handle s);
olym_handle olym_tos_i(olym_int v);
olym_handle olym_tos_r(olym_real v);
olym_handle olym_tos_b(olym_int v);
void olym_fmt_real(char *buf, size_t cap, olym_real v);
void olym_print_i(olym_int v);
void olym_print_r(olym_real v);
void olym_print_b(olym_int v);
void olym_print_s(olym_handle h);
void olym_print_c(olym_handle h);

/* transient-root stack: rooted until the enclosing statement completes */
static inline void olym_ts_push(olym_handle h) {
    if (olym_ts_top >= OLY_TS_MAX)
        olym_trap("transient stack overflow");
    olym_ts[olym_ts_top++] = h;
}
static inline void olym_ts_restore(size_t mark) { olym_ts_top = mark; }
static inline int olym_cond(const olym_guard *g, int c) {
    olym_ts_restore(g->tmark);
    return c;
}
/* while-loop control re-enters the abstract machine each iteration: the
   loop variable lives in the environment, not in a native register (the
   for-loop's native iterator is the cheap path) */
int olym_while_cond(const olym_guard *g, int c);

/* ---- addressing ---------------------------------------------------------- */

#define ADDRL(o) (&_oly_frame[(o)])
#ifdef OLYMPUS_DEBUG
#include <assert.h>
static inline olym_slot *olym_addrf_dbg(int l, int o) {
    assert(l >= 1 && l <= olym_depth);
    return &olym_display[olym_depth - l][o];
}
#define ADDRF(l, o) (olym_addrf_dbg((l), (o)))
#else
#define ADDRF(l, o) (&olym_display[olym_depth - (l)][(o)])
#endif
#define ID(a) ((olym_int)(intptr_t)(const void *)(a))

/* ---- typed loads ---------------------------------------------------------- */

#define LDI(a) ((a)->i)
#define LDR(a) ((a)->r)
#define LDB(a) ((a)->i)
#define LDS(a) ((a)->h)
#define LDC(a) ((a)->h)
#define LDV(a) ((a)->h)
#define LDL(a) ((a)->h)
#define LDCR(a) (((const olym_rcell *)olym_payload((a)->h))[0].v)
#define LDCI(a) (((const olym_rcell *)olym_payload((a)->h))[1].v)
#define LDCRH(h) (((const olym_rcell *)olym_payload(h))[0].v)
#define LDCIH(h) (((const olym_rcell *)olym_payload(h))[1].v)

static inline void *olym_elt(olym_handle h, olym_int i, size_t esz) {
#if OLYMPUS_BOUNDS
    olym_header *hd = olym_hdr(h);
    if (i < 0 || (olym_uint)i >= hd->len)
        olym_trap_index((long long)i, hd->len);
#endif
    return (char *)olym_htable[h] + (size_t)i * esz;
}

#define LDAI(a, i) (((olym_icell *)olym_elt((a)->h, (i), sizeof(olym_icell)))->v)
#define LDAR(a, i) (((olym_rcell *)olym_elt((a)->h, (i), sizeof(olym_rcell)))->v)
#define LDAB(a, i) LDAI(a, i)
#define LDAS(a, i) (((olym_hcell *)olym_elt((a)->h, (i), sizeof(olym_hcell)))->v)
#define LDAC(a, i) LDAS(a, i)
#define LDAV(a, i) LDAS(a, i)
#define LDAL(a, i) LDAS(a, i)
#define LDAIH(h, i) (((olym_icell *)olym_elt((h), (i), sizeof(olym_icell)))->v)
#define LDARH(h, i) (((olym_rcell *)olym_elt((h), (i), sizeof(olym_rcell)))->v)
#define LDABH(h, i) LDAIH(h, i)
#define LDASH(h, i) (((olym_hcell *)olym_elt((h), (i), sizeof(olym_hcell)))->v)
#define LDACH(h, i) LDASH(h, i)
#define LDAVH(h, i) LDASH(h, i)
#define LDALH(h, i) LDASH(h, i)

/* ---- typed stores (statement mnemonics end the transient scope) ---------- */

#define OLY_TCLEAR() olym_ts_restore(_oly_g.tmark)

#define STI(a, v) ((a)->i = (olym_int)(intptr_t)(v), OLY_TCLEAR())
#define STR(a, v) ((a)->r = (olym_real)(v), OLY_TCLEAR())
#define STB(a, v) STI(a, v)
#define STS(a, v) ((a)->h = (v), OLY_TCLEAR())
#define STC(a, v) STS(a, v)
#define STV(a, v) STS(a, v)
#define STL(a, v) STS(a, v)

#define STCR(a, val)                                                          \
    do {                                                                      \
        olym_slot *_oa = (a);                                                 \
        olym_real _ov = (olym_real)(val);                                     \
        ((olym_rcell *)olym_payload(_oa->h))[0].v = _ov;                      \
        OLY_TCLEAR();                                                         \
    } while (0)
#define STCI(a, val)                                                          \
    do {                                                                      \
        olym_slot *_oa = (a);                                                 \
        olym_real _ov = (olym_real)(val);                                     \
        ((olym_rcell *)olym_payload(_oa->h))[1].v = _ov;                      \
        OLY_TCLEAR();                                                         \
    } while (0)

#define OLY_STA(T, VT, a, i, val)                                             \
    do {                                                                      \
        olym_slot *_oa = (a);                                                 \
        olym_int _oi = (olym_int)(i);                                         \
        VT _ov = (VT)(val);                                                   \
        ((T *)olym_elt(_oa->h, _oi, sizeof(T)))->v = _ov;                     \
        OLY_TCLEAR();                                                         \
    } while (0)
#define OLY_STAH(T, VT, h, i, val)                                            \
    do {                                                                      \
        olym_handle _oh = (h);                                                \
        olym_int _oi = (olym_int)(i);                                         \
        VT _ov = (VT)(val);                                                   \
        ((T *)olym_elt(_oh, _oi, sizeof(T)))->v = _ov;                        \
        OLY_TCLEAR();                                                         \
    } while (0)

#define STAI(a, i, val) OLY_STA(olym_icell, olym_int, a, i, val)
#define STAR(a, i, val) OLY_STA(olym_rcell, olym_real, a, i, val)
#define STAB(a, i, val) STAI(a, i, val)
#define STAS(a, i, val) OLY_STA(olym_hcell, olym_handle, a, i, val)
#define STAC(a, i, val) STAS(a, i, val)
#define STAV(a, i, val) STAS(a, i, val)
#define STAL(a, i, val) STAS(a, i, val)
#define STAIH(h, i, val) OLY_STAH(olym_icell, olym_int, h, i, val)
#define STARH(h, i, val) OLY_STAH(olym_rcell, olym_real, h, i, val)
#define STABH(h, i, val) STAIH(h, i, val)
#define STASH(h, i, val) OLY_STAH(olym_hcell, olym_handle, h, i, val)
#define STACH(h, i, val) STASH(h, i, val)
#define STAVH(h, i, val) STASH(h, i, val)
#define STALH(h, i, val) STASH(h, i, val)

/* ---- declarations --------------------------------------------------------- */

#define DECLI(o) (_oly_frame[(o)].i = 0, OLY_TCLEAR())
#define DECLR(o) (_oly_frame[(o)].r = (olym_real)0, OLY_TCLEAR())
#define DECLB(o) DECLI(o)
#define DECLS(o) (_oly_frame[(o)].h = olym_mkstr("", 0), OLY_TCLEAR())
#define DECLC(o) (_oly_frame[(o)].h = olym_mkc(0, 0), OLY_TCLEAR())
#define DECLV(o, n, esz, eref)                                                \
    (_oly_frame[(o)].h = olym_alloc(OLY_K_VEC, (n), (esz), (eref)),           \
     OLY_TCLEAR())
#define DECLL(o, v) (_oly_frame[(o)].h = (v), OLY_TCLEAR())

/* ---- control --------------------------------------------------------------- */

#define TRUE ((olym_int)1)
#define FALSE ((olym_int)0)

#define IF(c) if (olym_cond(&_oly_g, (c))) {
#define ELSE } else {
#define WHILE(c) while (olym_while_cond(&_oly_g, (c))) {
#define END }

/* start is evaluated once; end and step are re-evaluated every iteration,
   sequenced step-then-end by the comma chain */
#define FOR(it, s, e, st)                                                     \
    for (olym_int it = (olym_int)(s), _oly_s_##it = 0, _oly_e_##it = 0;       \
         (OLY_TCLEAR(), _oly_s_##it = (olym_int)(st),                         \
          _oly_e_##it = (olym_int)(e),                                        \
          (_oly_s_##it > 0 ? it < _oly_e_##it : it > _oly_e_##it));           \
         it += (olym_int)(st)) {

/* ---- functions -------------------------------------------------------------- */

#define OFUNC_DECL(sym) static olym_value sym(const olym_value *_oly_args)
#define OFUNC(sym)                                                            \
    static olym_value sym(const olym_value *_oly_args) {                     \
        (void)_oly_args;
#define FRAME(depth_, size_, map_)                                            \
    olym_slot _oly_frame[(size_) > 0 ? (size_) : 1];                          \
    olym_guard _oly_g;                                                        \
    olym_enter(&_oly_g, _oly_frame, (size_), (depth_), (map_));
#define ENDFUNC                                                               \
    OLY_TCLEAR();                                                             \
    olym_leave(&_oly_g);                                                      \
    {                                                                         \
        olym_value _oly_z = {0};                                              \
        return _oly_z;                                                        \
    }                                                                         \
    }

#define PARAM_I(o, k) (_oly_frame[(o)].i = _oly_args[(k)].i)
#define PARAM_R(o, k) (_oly_frame[(o)].r = _oly_args[(k)].r)
#define PARAM_B(o, k) PARAM_I(o, k)
#define PARAM_S(o, k) (_oly_frame[(o)].h = _oly_args[(k)].h)
#define PARAM_C(o, k) PARAM_S(o, k)
#define PARAM_V(o, k) PARAM_S(o, k)
#define PARAM_L(o, k) PARAM_S(o, k)

/* RET copies the return value out before the frame is retracted; a
   heap-resident result is re-rooted above the caller's transient mark so
   it survives any compaction until the caller's statement completes. */
#define OLY_RET_SCALAR(field, x)                                              \
    do {                                                                      \
        olym_value _rv = {0};                                                 \
        _rv.field = (x);                                                      \
        OLY_TCLEAR();                                                         \
        olym_leave(&_oly_g);                                                  \
        return _rv;                                                           \
    } while (0)
#define OLY_RET_HANDLE(x)                                                     \
    do {                                                                      \
        olym_value _rv = {0};                                                 \
        _rv.h = (x);                                                          \
        OLY_TCLEAR();                                                         \
        olym_ts_push(_rv.h);                                                  \
        olym_leave(&_oly_g);                                                  \
        return _rv;                                                           \
    } while (0)

#define RET                                                                   \
    do {                                                                      \
        olym_value _rv = {0};                                                 \
        OLY_TCLEAR();                                                         \
        olym_leave(&_oly_g);                                                  \
        return _rv;                                                           \
    } while (0)
#define RET_I(x) OLY_RET_SCALAR(i, (olym_int)(intptr_t)(x))
#define RET_R(x) OLY_RET_SCALAR(r, (olym_real)(x))
#define RET_B(x) RET_I(x)
#define RET_S(x) OLY_RET_HANDLE(x)
#define RET_C(x) OLY_RET_HANDLE(x)
#define RET_V(x) OLY_RET_HANDLE(x)
#define RET_L(x) OLY_RET_HANDLE(x)

#define MKLAMBDA(sym, depth) olym_mklambda((sym), (depth))
#define APPLY olym_apply
#define APPLY_I(...) (olym_apply(__VA_ARGS__).i)
#define APPLY_R(...) (olym_apply(__VA_ARGS__).r)
#define APPLY_B(...) APPLY_I(__VA_ARGS__)
#define APPLY_S(...) (olym_apply(__VA_ARGS__).h)
#define APPLY_C(...) APPLY_S(__VA_ARGS__)
#define APPLY_V(...) APPLY_S(__VA_ARGS__)
#define APPLY_L(...) APPLY_S(__VA_ARGS__)

#define ARGI(x) ((olym_value){.i = (olym_int)(intptr_t)(x)})
#define ARGR(x) ((olym_value){.r = (olym_real)(x)})
#define ARGB(x) ARGI(x)
#define ARGS(x) ((olym_value){.h = (x)})
#define ARGC(x) ARGS(x)
#define ARGV(x) ARGS(x)
#define ARGL(x) ARGS(x)

/* ---- builtins and value constructors ----------------------------------------- */

#define PRINT_I(v) (olym_print_i((olym_int)(intptr_t)(v)), OLY_TCLEAR())
#define PRINT_R(v) (olym_print_r((olym_real)(v)), OLY_TCLEAR())
#define PRINT_B(v) (olym_print_b((olym_int)(intptr_t)(v)), OLY_TCLEAR())
#define PRINT_S(v) (olym_print_s(v), OLY_TCLEAR())
#define PRINT_C(v) (olym_print_c(v), OLY_TCLEAR())
#define EXPR(e) ((void)(e), OLY_TCLEAR())

#define LEN(h) ((olym_int)olym_hdr(h)->len)
#define SLIT(k) (olym_strlit_h[(k)])
#define MKC(re, im) olym_mkc((olym_real)(re), (olym_real)(im))
#define CADD olym_cadd
#define CSUB olym_csub
#define CMUL olym_cmul
#define CDIV olym_cdiv
#define CNEG olym_cneg
#define CEQ olym_ceq
#define CNE(a, b) (!olym_ceq((a), (b)))
#define SCAT olym_scat
#define SEQ olym_seq
#define SNE(a, b) (!olym_seq((a), (b)))
#define SIDX olym_sidx
#define MKVECI(n, ...) olym_mkvec_i((n), __VA_ARGS__)
#define MKVECR(n, ...) olym_mkvec_r((n), __VA_ARGS__)
#define MKVECS(n, ...) olym_mkvec_h(1, (n), __VA_ARGS__)
#define MKVECC(n, ...) olym_mkvec_h(1, (n), __VA_ARGS__)
#define MKVECV(n, ...) olym_mkvec_h(1, (n), __VA_ARGS__)
#define MKVECL(n, ...) olym_mkvec_h(1, (n), __VA_ARGS__)
#define REPV olym_repv

/* ---- arithmetic helpers -------------------------------------------------------- */

static inline olym_real DIVR(olym_real a, olym_real b) {
    if (b == 0)
        olym_trap("divide by zero");
    return a / b;
}

static inline olym_int MODI(olym_int a, olym_int b) {
    if (b == 0)
        olym_trap("divide by zero");
    if (b == -1)
        return 0; /* INT_MIN % -1 would fault in hardware */
    olym_int r = a % b;
    if (r != 0 && ((r < 0) != (b < 0)))
        r += b;
    return r;
}

static inline olym_real MODR(olym_real a, olym_real b) {
    if (b == 0)
        olym_trap("divide by zero");
    olym_real r = (olym_real)fmod((double)a, (double)b);
    if (r != 0) {
        if ((r < 0) != (b < 0))
            r += b;
    } else {
        r = (olym_real)copysign(0.0, (double)b);
    }
    return r;
}

static inline olym_int POWI(olym_int base, olym_int e) {
    if (e < 0)
        return 0;
    olym_uint acc = 1, b = (olym_uint)base;
    while (e > 0) {
        if (e & 1)
            acc *= b;
        b *= b;
        e >>= 1;
    }
    return (olym_int)acc;
}

static inline olym_real POWR(olym_real a, olym_real b) {
#if OLYMPUS_REAL32
    return (olym_real)powf(a, b);
#else
    return pow(a, b);
#endif
}

static inline olym_int TOI_R(olym_real v) {
    /* pinned to x86 cvttsd2si behaviour: NaN/out-of-range give INT_MIN */
    double d = (double)v;
#if OLYMPUS_INT64
    if (d != d || d >= 9223372036854775808.0 || d < -9223372036854775808.0)
        return (olym_int)INT64_MIN;
#else
    if (d != d || d >= 2147483648.0 || d < -2147483648.0)
        return (olym_int)INT32_MIN;
#endif
    return (olym_int)d;
}

static inline olym_real TOR_I(olym_int v) { return (olym_real)v; }
#define TOI_S olym_toi_s
#define TOR_S olym_tor_s
#define TOS_I olym_tos_i
#define TOS_R olym_tos_r
#define TOS_B olym_tos_b

/* ---- module prologue -------------------------------------------------------------- */

#define OLY_HEAP_CONST(n)                                                     \
    static const unsigned long _oly_heap_const __attribute__((unused)) = (n)
#define OLY_STRLITS(n, ...)                                                   \
    static const char *const _oly_strlit_src[] = {__VA_ARGS__};               \
    enum { _oly_nstrlits = (n) }

#define OMAIN(size_, map_)                                                    \
    void olympus_main(void) {                                                 \
        olym_init_strlits(_oly_strlit_src, _oly_nstrlits);                    \
        FRAME(0, size_, map_)
#define ENDMAIN                                                               \
    OLY_TCLEAR();                                                             \
    olym_leave(&_oly_g);                                                      \
    }

#endif /* OLYMPUS_H */
