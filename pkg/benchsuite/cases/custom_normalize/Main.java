public class Main {
    public static void main(String[] args) {
        String cleaned = MySpecialUtils.normalize("  MiXeD Case  ");
        System.out.println(cleaned);
    }
}
