/*
 * olympus.c - support unit for the Olympus abstract machine.
 *
 * Holds the statically allocated heap and its sliding mark-compact
 * collector, the display and frame registry, the transient-root stack,
 * function application, string/complex/vector constructors, formatted
 * printing, traps, and the process entry point.
 */
#include "olympus.h"

/* ---- global machine state ---------------------------------------------- */

static uint8_t olym_heap[OLYMPUS_HEAP_BYTES] __attribute__((aligned(16)));
void *olym_htable[OLY_MAX_HANDLES]; /* live: payload ptr; free: odd-tagged */
static uint8_t olym_marks[(OLY_MAX_HANDLES + 7) / 8];
static uint32_t olym_hfree;   /* head of the handle free list, 0 = none */
static uint32_t olym_hnext;   /* next never-used handle index */
static size_t olym_bump;      /* allocation frontier in bytes */

olym_slot *olym_display[OLY_MAX_DEPTH];
int olym_depth;
olym_guard *olym_guards;
olym_handle olym_ts[OLY_TS_MAX];
size_t olym_ts_top;
olym_handle olym_strlit_h[OLY_MAX_STRLITS];
static int olym_strlit_count;

static size_t olym_collections;
static size_t olym_freed_total;
static size_t olym_peak_used;

/* free handle-table entries are odd-tagged links: (next_index << 1) | 1;
   payload pointers are 8-aligned so live entries are always even */
#define OLY_FREE_TAG(next) ((void *)(((uintptr_t)(next) << 1) | 1u))
#define OLY_FREE_NEXT(e) ((uint32_t)((uintptr_t)(e) >> 1))
#define OLY_MARKED(h) (olym_marks[(h) >> 3] & (uint8_t)(1u << ((h)&7u)))
#define OLY_SET_MARK(h) (olym_marks[(h) >> 3] |= (uint8_t)(1u << ((h)&7u)))
#define OLY_CLEAR_MARK(h) (olym_marks[(h) >> 3] &= (uint8_t)~(1u << ((h)&7u)))

/* ---- traps ---------------------------------------------------------------- */

void olym_trap(const char *msg) {
    fflush(stdout);
    fprintf(stderr, "TRAP: %s\n", msg);
    exit(70);
}

void olym_trap_index(long long idx, unsigned long long len) {
    fflush(stdout);
    fprintf(stderr, "TRAP: index %lld out of range (len %llu)\n", idx, len);
    exit(70);
}

static void olym_trap_heap(size_t requested) {
    fflush(stdout);
    fprintf(stderr, "TRAP: heap exhausted allocating %zu bytes\n", requested);
    exit(70);
}

/* ---- heap ------------------------------------------------------------------ */

static size_t olym_payload_bytes(const olym_header *hd) {
    switch (hd->kind) {
    case OLY_K_VEC:
        return (size_t)hd->len * hd->esize;
    case OLY_K_STR:
        return (size_t)hd->len + 1;
    case OLY_K_CPLX:
        return 2 * sizeof(olym_real);
    case OLY_K_ENV:
        return sizeof(olym_env) + (size_t)hd->len * sizeof(olym_slot *);
    }
    olym_trap("corrupt heap header");
}

static size_t olym_obj_bytes(const olym_header *hd) {
    return sizeof(olym_header) + ((olym_payload_bytes(hd) + 7u) & ~(size_t)7u);
}

static void olym_mark(olym_handle h) {
    if (h == 0 || OLY_MARKED(h))
        return;
    OLY_SET_MARK(h);
    olym_header *hd = olym_hdr(h);
    if (hd->kind == OLY_K_VEC && hd->eref) {
        const olym_hcell *elems = (const olym_hcell *)olym_htable[h];
        for (uint32_t k = 0; k < hd->len; k++)
            olym_mark(elems[k].v);
    }
}

static void olym_mark_roots(void) {
    for (const olym_guard *g = olym_guards; g != NULL; g = g->prev) {
        for (int k = 0; k < g->size; k++) {
            if (g->map[k] == 'h')
                olym_mark(g->frame[k].h);
        }
    }
    for (size_t k = 0; k < olym_ts_top; k++)
        olym_mark(olym_ts[k]);
    for (int k = 0; k < olym_strlit_count; k++)
        olym_mark(olym_strlit_h[k]);
}

size_t olym_compact_now(void) {
    olym_mark_roots();
    size_t src = 0, dst = 0;
    while (src < olym_bump) {
        olym_header *hd = (olym_header *)(olym_heap + src);
        size_t bytes = olym_obj_bytes(hd);
        uint32_t h = hd->reloc;
        if (OLY_MARKED(h)) {
            OLY_CLEAR_MARK(h);
            if (dst != src)
                memmove(olym_heap + dst, olym_heap + src, bytes);
            olym_htable[h] = olym_heap + dst + sizeof(olym_header);
            dst += bytes;
        } else {
            olym_htable[h] = OLY_FREE_TAG(olym_hfree);
            olym_hfree = h;
        }
        src += bytes;
    }
    size_t freed = olym_bump - dst;
    olym_bump = dst;
    olym_collections++;
    olym_freed_total += freed;
    return freed;
}

static olym_handle olym_take_handle(void) {
    if (olym_hfree != 0) {
        olym_handle h = olym_hfree;
        olym_hfree = OLY_FREE_NEXT(olym_htable[h]);
        return h;
    }
    if (olym_hnext == 0)
        olym_hnext = 1; /* handle 0 is the null handle */
    if (olym_hnext < OLY_MAX_HANDLES)
        return olym_hnext++;
    return 0;
}

olym_handle olym_alloc(int kind, uint32_t len, uint8_t esize, uint8_t eref) {
    olym_header proto = {0, (uint8_t)kind, esize, eref, 0, len, 0};
    size_t payload = olym_payload_bytes(&proto);
    size_t bytes = sizeof(olym_header) + ((payload + 7u) & ~(size_t)7u);
    if (bytes > OLYMPUS_HEAP_BYTES - olym_bump) {
        olym_compact_now();
        if (bytes > OLYMPUS_HEAP_BYTES - olym_bump)
            olym_trap_heap(payload);
    }
    olym_handle h = olym_take_handle();
    if (h == 0) {
        olym_compact_now();
        h = olym_take_handle();
        if (h == 0)
            olym_trap_heap(payload);
    }
    olym_header *hd = (olym_header *)(olym_heap + olym_bump);
    *hd = proto;
    hd->reloc = h;
    memset((char *)hd + sizeof(olym_header), 0, bytes - sizeof(olym_header));
    olym_htable[h] = olym_heap + olym_bump + sizeof(olym_header);
    olym_bump += bytes;
    if (olym_bump > olym_peak_used)
        olym_peak_used = olym_bump;
    olym_ts_push(h);
    return h;
}

void olym_heap_stats(olym_stats_t *out) {
    out->heap_bytes = OLYMPUS_HEAP_BYTES;
    out->used = olym_bump;
    out->collections = olym_collections;
    out->freed_bytes = olym_freed_total;
    out->peak_used = olym_peak_used;
    size_t live = 0, off = 0;
    while (off < olym_bump) {
        olym_header *hd = (olym_header *)(olym_heap + off);
        off += olym_obj_bytes(hd);
        live++;
    }
    out->live_objects = live;
    size_t depth = 0;
    for (const olym_guard *g = olym_guards; g != NULL; g = g->prev)
        depth++;
    out->frame_depth = depth;
}

/* ---- frames and the display -------------------------------------------------- */

void olym_enter(olym_guard *g, olym_slot *frame, int size, int depth,
                const char *map) {
    if (depth >= OLY_MAX_DEPTH)
        olym_trap("nesting too deep");
    memset(frame, 0, (size_t)(size > 0 ? size : 0) * sizeof(olym_slot));
    g->frame = frame;
    g->map = map;
    g->size = size;
    g->depth = depth;
    g->tmark = olym_ts_top;
    g->prev_depth = olym_depth;
    g->saved_display = olym_display[depth];
    g->prev = olym_guards;
    olym_display[depth] = frame;
    olym_depth = depth;
    olym_guards = g;
}

void olym_leave(olym_guard *g) {
    olym_display[g->depth] = g->saved_display;
    olym_depth = g->prev_depth;
    olym_guards = g->prev;
}

int olym_while_cond(const olym_guard *g, int c) {
    olym_ts_top = g->tmark;
    return c;
}

/* ---- closures ------------------------------------------------------------------ */

olym_handle olym_mklambda(olym_fn fn, int depth) {
    olym_handle h = olym_alloc(OLY_K_ENV, (uint32_t)depth, 0, 0);
    olym_env *env = (olym_env *)olym_payload(h);
    env->fn = fn;
    for (int k = 0; k < depth; k++)
        env->frames[k] = olym_display[k];
    return h;
}

olym_value olym_apply(olym_handle fnval, int argc, ...) {
    if (argc > OLY_MAX_ARGS)
        olym_trap("too many arguments");
    olym_value args[OLY_MAX_ARGS];
    va_list ap;
    va_start(ap, argc);
    for (int k = 0; k < argc; k++)
        args[k] = va_arg(ap, olym_value);
    va_end(ap);
    /* copy the environment out before the body runs: the env object may
       move if the callee compacts the heap */
    olym_env *env = (olym_env *)olym_payload(fnval);
    uint32_t depth = olym_hdr(fnval)->len;
    olym_fn fn = env->fn;
    olym_slot *install[OLY_MAX_DEPTH];
    olym_slot *saved[OLY_MAX_DEPTH];
    for (uint32_t k = 0; k < depth; k++)
        install[k] = env->frames[k];
    for (uint32_t k = 0; k < depth; k++) {
        saved[k] = olym_display[k];
        olym_display[k] = install[k];
    }
    olym_value rv = fn(args);
    for (uint32_t k = 0; k < depth; k++)
        olym_display[k] = saved[k];
    return rv;
}

/* ---- strings ---------------------------------------------------------------------- */

olym_handle olym_mkstr(const char *chars, uint32_t len) {
    olym_handle h = olym_alloc(OLY_K_STR, len, 1, 0);
    char *p = (char *)olym_payload(h);
    memcpy(p, chars, len);
    p[len] = '\0';
    return h;
}

void olym_init_strlits(const char *const *lits, int n) {
    if (n > OLY_MAX_STRLITS)
        olym_trap("too many string literals");
    olym_strlit_count = n;
    for (int k = 0; k < n; k++)
        olym_strlit_h[k] = olym_mkstr(lits[k], (uint32_t)strlen(lits[k]));
    olym_ts_top = 0; /* literals are rooted by the literal table itself */
}

olym_handle olym_scat(olym_handle a, olym_handle b) {
    uint32_t la = olym_hdr(a)->len, lb = olym_hdr(b)->len;
    olym_handle h = olym_alloc(OLY_K_STR, la + lb, 1, 0);
    char *p = (char *)olym_payload(h);
    memcpy(p, olym_payload(a), la);
    memcpy(p + la, olym_payload(b), lb);
    p[la + lb] = '\0';
    return h;
}

olym_int olym_seq(olym_handle a, olym_handle b) {
    uint32_t la = olym_hdr(a)->len, lb = olym_hdr(b)->len;
    if (la != lb)
        return FALSE;
    return memcmp(olym_payload(a), olym_payload(b), la) == 0 ? TRUE : FALSE;
}

olym_handle olym_sidx(olym_handle s, olym_int i) {
    olym_header *hd = olym_hdr(s);
    if (i < 0 || (olym_uint)i >= hd->len)
        olym_trap_index((long long)i, hd->len);
    char c = ((char *)olym_payload(s))[i];
    return olym_mkstr(&c, 1);
}

/* ---- complex numbers ------------------------------------------------------------------ */

olym_handle olym_mkc(olym_real re, olym_real im) {
    olym_handle h = olym_alloc(OLY_K_CPLX, 2, sizeof(olym_real), 0);
    olym_rcell *p = (olym_rcell *)olym_payload(h);
    p[0].v = re;
    p[1].v = im;
    return h;
}

#define CPLX_PARTS(h, a, b)                                                   \
    olym_real a = ((const olym_rcell *)olym_payload(h))[0].v;                 \
    olym_real b = ((const olym_rcell *)olym_payload(h))[1].v

olym_handle olym_cadd(olym_handle x, olym_handle y) {
    CPLX_PARTS(x, a, b);
    CPLX_PARTS(y, c, d);
    return olym_mkc(a + c, b + d);
}

olym_handle olym_csub(olym_handle x, olym_handle y) {
    CPLX_PARTS(x, a, b);
    CPLX_PARTS(y, c, d);
    return olym_mkc(a - c, b - d);
}

olym_handle olym_cmul(olym_handle x, olym_handle y) {
    CPLX_PARTS(x, a, b);
    CPLX_PARTS(y, c, d);
    return olym_mkc(a * c - b * d, a * d + b * c);
}

olym_handle olym_cdiv(olym_handle x, olym_handle y) {
    CPLX_PARTS(x, a, b);
    CPLX_PARTS(y, c, d);
    olym_real den = c * c + d * d;
    if (den == 0)
        olym_trap("divide by zero");
    return olym_mkc((a * c + b * d) / den, (b * c - a * d) / den);
}

olym_handle olym_cneg(olym_handle x) {
    CPLX_PARTS(x, a, b);
    return olym_mkc(-a, -b);
}

olym_int olym_ceq(olym_handle x, olym_handle y) {
    CPLX_PARTS(x, a, b);
    CPLX_PARTS(y, c, d);
    return (a == c && b == d) ? TRUE : FALSE;
}

/* ---- vectors ------------------------------------------------------------------------- */

olym_handle olym_mkvec_i(int n, ...) {
    olym_handle h = olym_alloc(OLY_K_VEC, (uint32_t)n, sizeof(olym_int), 0);
    va_list ap;
    va_start(ap, n);
    olym_icell *p = (olym_icell *)olym_payload(h);
    for (int k = 0; k < n; k++)
        p[k].v = va_arg(ap, olym_int);
    va_end(ap);
    return h;
}

olym_handle olym_mkvec_r(int n, ...) {
    olym_handle h = olym_alloc(OLY_K_VEC, (uint32_t)n, sizeof(olym_real), 0);
    va_list ap;
    va_start(ap, n);
    olym_rcell *p = (olym_rcell *)olym_payload(h);
    for (int k = 0; k < n; k++)
        p[k].v = (olym_real)va_arg(ap, double);
    va_end(ap);
    return h;
}

olym_handle olym_mkvec_h(uint8_t eref, int n, ...) {
    /* handles in the va_list are indices, not pointers: they stay valid
       even if this allocation compacts the heap */
    olym_handle h = olym_alloc(OLY_K_VEC, (uint32_t)n, sizeof(olym_handle), eref);
    olym_hcell *p = (olym_hcell *)olym_payload(h);
    va_list ap;
    va_start(ap, n);
    for (int k = 0; k < n; k++)
        p[k].v = va_arg(ap, olym_handle);
    va_end(ap);
    return h;
}

olym_handle olym_repv(olym_handle src, olym_int count) {
    if (count < 0)
        count = 0;
    olym_header *hd = olym_hdr(src);
    uint32_t len = hd->len;
    uint8_t esize = hd->esize, eref = hd->eref, kind = hd->kind;
    if (kind != OLY_K_VEC)
        olym_trap("replication needs a vector");
    uint64_t total = (uint64_t)len * (uint64_t)count;
    if (total > 0xffffffffu)
        olym_trap_heap((size_t)total * esize);
    olym_handle h = olym_alloc(OLY_K_VEC, (uint32_t)total, esize, eref);
    char *dstp = (char *)olym_payload(h);
    const char *srcp = (const char *)olym_payload(src); /* after alloc */
    size_t chunk = (size_t)len * esize;
    for (olym_int k = 0; k < count; k++)
        memcpy(dstp + (size_t)k * chunk, srcp, chunk);
    return h;
}

/* ---- conversions ----------------------------------------------------------------------- */

olym_int olym_toi_s(olym_handle s) {
    const char *p = (const char *)olym_payload(s);
    char *end = NULL;
    long long v = strtoll(p, &end, 10);
    if (end == p || *end != '\0' || olym_hdr(s)->len == 0) {
        char msg[96];
        snprintf(msg, sizeof msg, "invalid int literal '%.40s'", p);
        olym_trap(msg);
    }
    return (olym_int)v;
}

olym_real olym_tor_s(olym_handle s) {
    const char *p = (const char *)olym_payload(s);
    char *end = NULL;
    double v = strtod(p, &end);
    if (end == p || *end != '\0' || olym_hdr(s)->len == 0) {
        char msg[96];
        snprintf(msg, sizeof msg, "invalid real literal '%.40s'", p);
        olym_trap(msg);
    }
    return (olym_real)v;
}

olym_handle olym_tos_i(olym_int v) {
    char buf[32];
    int n = snprintf(buf, sizeof buf, "%" OLY_PRI_INT, v);
    return olym_mkstr(buf, (uint32_t)n);
}

olym_handle olym_tos_r(olym_real v) {
    char buf[64];
    olym_fmt_real(buf, sizeof buf, v);
    return olym_mkstr(buf, (uint32_t)strlen(buf));
}

olym_handle olym_tos_b(olym_int v) {
    return v ? olym_mkstr("True", 4) : olym_mkstr("False", 5);
}

/* ---- printing ------------------------------------------------------------------------ */

void olym_fmt_real(char *buf, size_t cap, olym_real v) {
    /* shortest round-trip decimal: minimal significant digits that parse
       back to the same value, rendered fixed-point for exponents in
       [-4, 16) and scientific with a signed 2+ digit exponent otherwise */
    double d = (double)v;
    if (d != d) {
        snprintf(buf, cap, "nan");
        return;
    }
    if (d == (double)INFINITY) {
        snprintf(buf, cap, "inf");
        return;
    }
    if (d == -(double)INFINITY) {
        snprintf(buf, cap, "-inf");
        return;
    }
    char tmp[48];
    int p;
#if OLYMPUS_REAL32
    for (p = 0; p <= 8; p++) { /* up to 9 significant digits */
        snprintf(tmp, sizeof tmp, "%.*e", p, d);
        if (strtof(tmp, NULL) == (float)v)
            break;
    }
#else
    for (p = 0; p <= 16; p++) { /* up to 17 significant digits */
        snprintf(tmp, sizeof tmp, "%.*e", p, d);
        if (strtod(tmp, NULL) == d)
            break;
    }
#endif
    char digits[32] = "0";
    int nd = 0, neg = 0;
    const char *s = tmp;
    if (*s == '-') {
        neg = 1;
        s++;
    }
    for (; *s && *s != 'e'; s++) {
        if (*s != '.')
            digits[nd++] = *s;
    }
    int exp10 = atoi(s + 1);
    char *o = buf;
    (void)cap; /* callers pass >= 48 bytes */
    if (neg)
        *o++ = '-';
    if (exp10 < -4 || exp10 >= 16) {
        *o++ = digits[0];
        if (nd > 1) {
            *o++ = '.';
            memcpy(o, digits + 1, (size_t)nd - 1);
            o += nd - 1;
        }
        o += sprintf(o, "e%+03d", exp10);
        *o = '\0';
    } else if (exp10 >= nd - 1) {
        memcpy(o, digits, (size_t)nd);
        o += nd;
        for (int k = 0; k < exp10 - (nd - 1); k++)
            *o++ = '0';
        *o++ = '.';
        *o++ = '0';
        *o = '\0';
    } else if (exp10 >= 0) {
        memcpy(o, digits, (size_t)exp10 + 1);
        o += exp10 + 1;
        *o++ = '.';
        memcpy(o, digits + exp10 + 1, (size_t)(nd - exp10 - 1));
        o += nd - exp10 - 1;
        *o = '\0';
    } else {
        *o++ = '0';
        *o++ = '.';
        for (int k = 0; k < -exp10 - 1; k++)
            *o++ = '0';
        memcpy(o, digits, (size_t)nd);
        o += nd;
        *o = '\0';
    }
}

void olym_print_i(olym_int v) { printf("%" OLY_PRI_INT "\n", v); }

void olym_print_r(olym_real v) {
    char buf[64];
    olym_fmt_real(buf, sizeof buf, v);
    puts(buf);
}

void olym_print_b(olym_int v) { puts(v ? "True" : "False"); }

void olym_print_s(olym_handle h) { puts((const char *)olym_payload(h)); }

void olym_print_c(olym_handle h) {
    CPLX_PARTS(h, re, im);
    char rb[64], ib[64];
    olym_fmt_real(rb, sizeof rb, re);
    olym_fmt_real(ib, sizeof ib, (olym_real)fabs((double)im));
    printf("(%s%c%sj)\n", rb, signbit((double)im) ? '-' : '+', ib);
}

/* ---- entry point ----------------------------------------------------------------------- */

#ifndef OLYMPUS_NO_MAIN
int main(void) {
    olympus_main();
    fflush(stdout);
    return 0;
}
#endif
