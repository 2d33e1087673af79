public class Escapes {
    String quoted = "say \"hello\" twice";
    String path = "C:\\temp\\log.txt";
    String newline = "line1\nline2";
}
