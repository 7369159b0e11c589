public class Main {
    public static void main(String[] args) throws Exception {
        Path p = Paths.get("data.txt");
        if (Files.exists(p)) {
            System.out.println(Files.readString(p));
        }
    }
}
