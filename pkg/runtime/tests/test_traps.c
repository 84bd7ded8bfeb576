/* Trap-side checks: each mode must exit with code 70 (checked by make). */
#include "olympus.h"

void olympus_main(void) {}

int main(int argc, char **argv) {
    olym_slot _oly_frame[4];
    olym_guard _oly_g;
    olym_enter(&_oly_g, _oly_frame, 4, 0, "hhhh");
    if (argc < 2)
        return 2;
    if (strcmp(argv[1], "index") == 0) {
        /* boundary case: index == len */
        STV(ADDRL(0), MKVECI(5, 1, 2, 3, 4, 5));
        STAI(ADDRL(0), 5, 42);
        return 0; /* unreachable */
    }
    if (strcmp(argv[1], "div") == 0) {
        printf("%f\n", (double)DIVR(1.0, 0.0));
        return 0;
    }
    if (strcmp(argv[1], "heap") == 0) {
        /* keep everything live: traps exactly when live + request exceed
           capacity, growth loop bounded well past that point */
        STV(ADDRL(0), MKVECI(1, 1));
        for (int k = 0; k < 100000; k++) {
            olym_handle bigger = olym_repv(LDV(ADDRL(0)), 2);
            STV(ADDRL(0), bigger);
        }
        return 0;
    }
    return 2;
}
