import java.io.File;

public class Main {
    public static void main(String[] args) throws Exception {
        File f = new File("notes.txt");
        String text = FileUtils.readFileToString(f, "UTF-8");
        System.out.println(text.length());
    }
}
