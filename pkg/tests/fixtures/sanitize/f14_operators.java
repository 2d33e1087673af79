public class Operators {
    int z = (a & b) | (c ^ d) % e;
    boolean t = a <= b && c >= d || !e;
    int shift = v << 2 >>> 1;
}
